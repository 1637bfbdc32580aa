#pragma once

#include <string>

#include "gms/measure.hpp"
#include "gms/pw_map.hpp"

namespace gms {

// Shared demo objects used by the CLI and the test suites.

// Probability law with mass 1 and moment 1: density 1 on (1/2, 3/2].
RMeasure centered_uniform();
// Unit atom at t = 1.
RMeasure unit_atom();
// 1/4 at t = 2 plus 3/4 at t = 2/3 (mass 1, moment 1).
RMeasure atom_pair();

PwMap identity_map();
// Slope 1/2 on [0, 1/2) then 3/2 on [1/2, 1): derivative law is the atom
// pair at 1/2 and 3/2.
PwMap two_slope_map();
// Convex map x^2/2 + x/2, derivative law centered_uniform().
PwMap parabola_map();
// Two half-size copies of the parabola glued side by side; same derivative
// law as the parabola but every value attained twice.
PwMap two_copy_map();

// nullopt-free lookups; throw PreconditionError for unknown names.
RMeasure fixture_measure(const std::string& name);
PwMap fixture_map(const std::string& name);

}  // namespace gms
