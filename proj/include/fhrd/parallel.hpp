#pragma once

#include <functional>

namespace fhrd {

// OpenMP worker count currently in effect (1 when built without OpenMP).
int max_workers();

// Caps the OpenMP worker pool; count <= 0 restores the hardware default.
void set_workers(int count);

// Runs body(i) for i in [0, count). With parallel == true the iterations are
// distributed over OpenMP threads; the serial path is the reference
// implementation used by the tests. Bodies must write only to their own
// slot so results are identical under any schedule.
void for_each_index(int count, bool parallel, const std::function<void(int)>& body);

}  // namespace fhrd
