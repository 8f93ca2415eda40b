#ifndef QUANT_H
#define QUANT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum QuantStatus {
  QUANT_STATUS_OK = 0,
  /**
   * The ticket has no value yet.
   */
  QUANT_STATUS_PENDING = 1,
  /**
   * The ticket was cancelled and will never receive a value.
   */
  QUANT_STATUS_CANCELLED = 2,
  /**
   * The ticket's value was already taken.
   */
  QUANT_STATUS_TAKEN = 3,
  /**
   * Cancellation came too late: a value was delivered.
   */
  QUANT_STATUS_FULFILLED = 4,
  QUANT_STATUS_NULL_ARGUMENT = -1,
  QUANT_STATUS_INVALID_ARGUMENT = -2,
  QUANT_STATUS_IO = -3,
  QUANT_STATUS_PARSE = -4,
  /**
   * The history contains a call that cannot be verified.
   */
  QUANT_STATUS_MALFORMED = -5,
  /**
   * A Rust panic was caught at the boundary.
   */
  QUANT_STATUS_PANIC = -6,
} QuantStatus;

/**
 * Opaque recorded history.
 */
typedef struct QuantHistory QuantHistory;

/**
 * Opaque quantifiable queue of `uint64_t`.
 */
typedef struct QuantQQueue QuantQQueue;

/**
 * Opaque quantifiable stack of `uint64_t`.
 */
typedef struct QuantQStack QuantQStack;

/**
 * Opaque result of a pop or dequeue.
 */
typedef struct QuantTicket QuantTicket;

/**
 * Summary of a verification.
 */
typedef struct QuantVerdict {
  bool quantifiable;
  size_t calls;
  size_t pending;
  size_t configurations;
  size_t violations;
} QuantVerdict;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failure on this thread, or null if there was none.
 * The string stays valid until the next failing call on this thread.
 */
const char *quant_last_error(void);

/**
 * New stack with `width` tail slots (at least 1). Returns null on error.
 */
struct QuantQStack *quant_qstack_new(size_t width, size_t fail_threshold);

/**
 * # Safety
 * `stack` is null or came from [`quant_qstack_new`] and is not used afterwards.
 * Values still in the stack are discarded.
 */
void quant_qstack_free(struct QuantQStack *stack);

/**
 * # Safety
 * `stack` came from [`quant_qstack_new`] and has not been freed.
 */
enum QuantStatus quant_qstack_push(const struct QuantQStack *stack, uint64_t value);

/**
 * Pops into a new ticket stored in `*out`; free it with [`quant_ticket_free`].
 *
 * # Safety
 * `stack` came from [`quant_qstack_new`] and has not been freed; `out` is
 * writable.
 */
enum QuantStatus quant_qstack_pop(const struct QuantQStack *stack, struct QuantTicket **out);

/**
 * New queue with `width` sublists (at least 1). Returns null on error.
 */
struct QuantQQueue *quant_qqueue_new(size_t width);

/**
 * # Safety
 * `queue` is null or came from [`quant_qqueue_new`] and is not used afterwards.
 */
void quant_qqueue_free(struct QuantQQueue *queue);

/**
 * # Safety
 * `queue` came from [`quant_qqueue_new`] and has not been freed.
 */
enum QuantStatus quant_qqueue_enqueue(const struct QuantQQueue *queue, uint64_t value);

/**
 * Dequeues into a new ticket stored in `*out`.
 *
 * # Safety
 * `queue` came from [`quant_qqueue_new`] and has not been freed; `out` is
 * writable.
 */
enum QuantStatus quant_qqueue_dequeue(const struct QuantQQueue *queue, struct QuantTicket **out);

/**
 * Takes the ticket's value into `*value` if it has arrived. Returns
 * `Ok`, `Pending`, `Cancelled` or `Taken`.
 *
 * # Safety
 * `ticket` is a live ticket handle; `value` is writable.
 */
enum QuantStatus quant_ticket_poll(struct QuantTicket *ticket, uint64_t *value);

/**
 * Spins, yielding the thread, until the ticket is resolved. Returns what
 * [`quant_ticket_poll`] returns, except never `Pending`.
 *
 * # Safety
 * As for [`quant_ticket_poll`].
 */
enum QuantStatus quant_ticket_wait(struct QuantTicket *ticket, uint64_t *value);

/**
 * Cancels a pending ticket. Returns `Ok` if this call cancelled it,
 * `Cancelled` if it already was, and `Fulfilled` if a value has been
 * delivered (poll to collect it, unless it was already taken).
 *
 * # Safety
 * `ticket` is a live ticket handle.
 */
enum QuantStatus quant_ticket_cancel(struct QuantTicket *ticket);

/**
 * Frees a ticket, cancelling it if still pending.
 *
 * # Safety
 * `ticket` is null or a live ticket handle that is not used afterwards.
 */
void quant_ticket_free(struct QuantTicket *ticket);

/**
 * Loads a history file into `*out`.
 *
 * # Safety
 * `path` is a NUL-terminated string; `out` is writable.
 */
enum QuantStatus quant_history_load(const char *path, struct QuantHistory **out);

/**
 * Parses history text (the same format as files) into `*out`.
 *
 * # Safety
 * `text` is a NUL-terminated string; `out` is writable.
 */
enum QuantStatus quant_history_parse(const char *text, struct QuantHistory **out);

/**
 * Number of calls in the history, or 0 for null.
 *
 * # Safety
 * `history` is null or a live history handle.
 */
size_t quant_history_len(const struct QuantHistory *history);

/**
 * # Safety
 * `history` is null or a live history handle that is not used afterwards.
 */
void quant_history_free(struct QuantHistory *history);

/**
 * Verifies the history and writes a summary to `*out`.
 *
 * # Safety
 * `history` is a live history handle; `out` is writable.
 */
enum QuantStatus quant_history_verify(const struct QuantHistory *history, struct QuantVerdict *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QUANT_H */
