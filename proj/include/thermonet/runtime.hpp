#pragma once

namespace thermonet {

/// Keeps large training temporaries on the heap instead of fresh mmap pages.
/// Call once at program start; a no-op outside glibc.
void configure_allocator();

}  // namespace thermonet
