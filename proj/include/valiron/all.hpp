#pragma once

// Convenience header pulling in the whole library.

#include "valiron/errors.hpp"
#include "valiron/tolerances.hpp"
#include "valiron/linalg.hpp"
#include "valiron/random.hpp"
#include "valiron/geometry.hpp"
#include "valiron/maps.hpp"
#include "valiron/dynamics.hpp"
#include "valiron/renormalization.hpp"
#include "valiron/limits.hpp"
#include "valiron/config.hpp"
#include "valiron/experiment.hpp"
