#pragma once

// Moment-matrix NPT criteria for two-mode bosonic states: exact and floating
// moment backends, leading- and all-principal-minor tests, witness search,
// and a density-matrix partial-transpose oracle.

#include "npt/errors.hpp"     // IWYU pragma: export
#include "npt/fock.hpp"       // IWYU pragma: export
#include "npt/minors.hpp"     // IWYU pragma: export
#include "npt/moments.hpp"    // IWYU pragma: export
#include "npt/multiindex.hpp" // IWYU pragma: export
#include "npt/ppt.hpp"        // IWYU pragma: export
#include "npt/rational.hpp"   // IWYU pragma: export
#include "npt/state_io.hpp"   // IWYU pragma: export
#include "npt/surd.hpp"       // IWYU pragma: export
