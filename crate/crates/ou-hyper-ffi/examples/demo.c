/* Minimal consumer of the C API: checks the contraction at its extremal
 * exponential input, where the two sides agree to quadrature precision.
 *
 * Build (from the workspace root, after `cargo build -p ou-hyper-ffi --release`):
 *   cc crates/ou-hyper-ffi/examples/demo.c \
 *      -Icrates/ou-hyper-ffi/include \
 *      target/release/libou_hyper_ffi.a -lpthread -ldl -lm -o demo
 */

#include <stdio.h>

#include "ou_hyper.h"

int main(void) {
  if (ou_abi_version() != OU_ABI_VERSION) {
    fprintf(stderr, "ABI mismatch\n");
    return 1;
  }

  OuEvaluator *ev = NULL;
  OuFunction *f = NULL;
  int rc = 1;

  if (ou_evaluator_new(1, &ev) != OU_STATUS_OK) goto fail;
  if (ou_function_parse("exp_linear:lambda=0.6", 1, &f) != OU_STATUS_OK) goto fail;

  OuVerdict v;
  if (ou_check_hc(ev, f, 2.0, 0.5, &v) != OU_STATUS_OK) goto fail;

  printf("lhs=%.12f rhs=%.12f margin=%.3e holds=%d\n", v.lhs, v.rhs, v.margin,
         (int)v.holds);
  rc = v.holds ? 0 : 1;
  goto done;

fail:
  fprintf(stderr, "error: %s\n", ou_last_error_message());
done:
  ou_function_free(f);
  ou_evaluator_free(ev);
  return rc;
}
