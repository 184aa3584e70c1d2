#pragma once

namespace nodefeat {

// Training allocates and frees many same-sized temporaries per step. Keeping
// freed memory in the heap instead of returning it to the kernel avoids most
// of the page-fault cost. No-op outside glibc.
void tune_allocator();

}  // namespace nodefeat
