/* Declarations-only stand-in for the engine header. Lets generated programs
 * be syntax-checked or compiled natively without the engine installed. */
#ifndef PROTOSYNTH_KLEE_SHIM_H
#define PROTOSYNTH_KLEE_SHIM_H
#include <stddef.h>
#include <stdint.h>
void klee_make_symbolic(void* addr, size_t nbytes, const char* name);
void klee_assume(uintptr_t condition);
#endif
