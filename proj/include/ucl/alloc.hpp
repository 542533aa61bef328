#pragma once

#if defined(__GLIBC__)
#include <malloc.h>
#endif

namespace ucl {

// Training allocates and frees large Eigen temporaries every step; keep them on the heap.
inline void tune_allocator() {
#if defined(__GLIBC__)
    mallopt(M_MMAP_THRESHOLD, 32 << 20);
    mallopt(M_TRIM_THRESHOLD, 512 << 20);
    mallopt(M_TOP_PAD, 64 << 20);
#endif
}

}  // namespace ucl
