#pragma once

#if defined(__SSE2__)
#include <xmmintrin.h>
#endif

namespace qwalk::detail {

// Flush-to-zero and denormals-are-zero for the current thread while in scope.
// Amplitudes near the light-cone corners decay like 2^-t and would otherwise
// spend most of a long walk in the slow subnormal range.
class ScopedFlushDenormals {
 public:
#if defined(__SSE2__)
  ScopedFlushDenormals() : saved_(_mm_getcsr()) { _mm_setcsr(saved_ | 0x8040u); }
  ~ScopedFlushDenormals() { _mm_setcsr(saved_); }

 private:
  unsigned saved_;
#else
  ScopedFlushDenormals() = default;
#endif

 public:
  ScopedFlushDenormals(const ScopedFlushDenormals&) = delete;
  ScopedFlushDenormals& operator=(const ScopedFlushDenormals&) = delete;
};

}  // namespace qwalk::detail
