#include "gms/examples.hpp"

namespace gms {

RMeasure centered_uniform() { return RMeasure::uniform(Scalar::ratio(1, 2), Scalar::ratio(3, 2)); }

RMeasure unit_atom() { return RMeasure::point_mass(Scalar(1)); }

RMeasure atom_pair() {
  return RMeasure({{Scalar(2), Scalar::ratio(1, 4)}, {Scalar::ratio(2, 3), Scalar::ratio(3, 4)}},
                  {});
}

PwMap identity_map() { return PwMap::identity(); }

PwMap two_slope_map() {
  const Scalar half = Scalar::ratio(1, 2);
  const Scalar quarter = Scalar::ratio(1, 4);
  return PwMap({
      Segment{Scalar(0), half, Scalar(0), quarter, LinearForm{half}},
      Segment{half, Scalar(1), quarter, Scalar(1), LinearForm{Scalar::ratio(3, 2)}},
  });
}

PwMap parabola_map() {
  return PwMap(
      {Segment{Scalar(0), Scalar(1), Scalar(0), Scalar(1), QuantileForm{centered_uniform(), Scalar(0)}}});
}

PwMap two_copy_map() {
  const RMeasure half_uniform = centered_uniform().scaled(Scalar::ratio(1, 2));
  const Scalar half = Scalar::ratio(1, 2);
  return PwMap({
      Segment{Scalar(0), half, Scalar(0), half, QuantileForm{half_uniform, Scalar(0)}},
      Segment{half, Scalar(1), half, Scalar(1), QuantileForm{half_uniform, Scalar(0)}},
  });
}

RMeasure fixture_measure(const std::string& name) {
  if (name == "uniform") return centered_uniform();
  if (name == "delta1") return unit_atom();
  if (name == "atoms") return atom_pair();
  throw PreconditionError("unknown measure fixture '" + name +
                          "' (expected uniform, delta1 or atoms, or a JSON file path)");
}

PwMap fixture_map(const std::string& name) {
  if (name == "identity") return identity_map();
  if (name == "twoslope") return two_slope_map();
  if (name == "parabola") return parabola_map();
  if (name == "twocopy") return two_copy_map();
  throw PreconditionError("unknown map fixture '" + name +
                          "' (expected identity, twoslope, parabola or twocopy, or a JSON file "
                          "path)");
}

}  // namespace gms
