#pragma once

#include <array>
#include <cstddef>

// Numerical thresholds shared by every module. Read-only by construction.
namespace valiron::tolerance {

// Strict domain inequalities (||z|| < 1, Re z > ||w||^2) are enforced with this
// relative slack; points inside the slack are rejected, never clamped.
inline constexpr double boundary_slack = 1e-12;

// |‖tau‖^2 - 1| for boundary directions.
inline constexpr double unit_norm = 1e-12;

// Half-width of the "undecided" band around Koranyi region boundaries and
// around the classification cross-checks.
inline constexpr double koranyi_band = 1e-9;

// Raw iteration refuses to continue once Re z exceeds this.
inline constexpr double overflow_threshold = 1e300;

// ‖w_n‖^2 / x_n below this on the tail counts as special.
inline constexpr double special_residual = 1e-6;

// Tail = last half of a sequence, never fewer than this many terms.
inline constexpr std::size_t min_tail = 8;

// Multiplier estimates at or below 1 + this are treated as non-hyperbolic.
inline constexpr double hyperbolic_margin = 1e-6;

// lambda * c = 1 consistency for maps that carry both multipliers.
inline constexpr double multiplier_consistency = 1e-12;

// Amplitude witnesses reported by the Koranyi sweep.
inline constexpr std::array<double, 12> koranyi_grid = {1.1, 1.5, 2.0,   4.0,   8.0,   16.0,
                                                        32.0, 64.0, 128.0, 256.0, 512.0, 1024.0};

inline constexpr double koranyi_cap = koranyi_grid.back();

}  // namespace valiron::tolerance
