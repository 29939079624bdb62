#pragma once

namespace sncnet {

// Caps the worker threads used by the parallel loops in this library.
// n <= 0 restores the default (machine parallelism). Results never depend on
// the thread count; the cap only bounds resource use.
void set_max_threads(int n);

// The currently effective worker count.
int max_threads();

} // namespace sncnet
