#include "gms/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace gms {

std::string format_double(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

Json scalar_to_json(const Scalar& s) {
  if (s.exact() && !s.exact()->is_integer())
    return Json{{"num", s.exact()->num()}, {"den", s.exact()->den()}};
  return Json(s.value());
}

Scalar scalar_from_json(const Json& j) {
  if (j.is_object()) {
    if (!j.contains("num") || !j.contains("den"))
      throw ValidationError("rational scalar needs both num and den");
    const auto q = Rational::make(j.at("num").get<std::int64_t>(), j.at("den").get<std::int64_t>());
    if (!q) throw ValidationError("rational scalar has zero denominator or overflows");
    return Scalar(*q);
  }
  if (j.is_number_integer()) return Scalar(j.get<std::int64_t>());
  if (j.is_number()) return Scalar(j.get<double>());
  throw ValidationError("expected a number or {num, den} object");
}

Json measure_to_json(const RMeasure& m) {
  Json atoms = Json::array();
  for (const auto& a : m.atoms())
    atoms.push_back(Json{{"t", scalar_to_json(a.t)}, {"mass", scalar_to_json(a.mass)}});
  Json pieces = Json::array();
  for (const auto& p : m.pieces()) {
    Json coeffs = Json::array();
    for (const auto& c : p.density.coeffs()) coeffs.push_back(scalar_to_json(c));
    pieces.push_back(
        Json{{"a", scalar_to_json(p.lo)}, {"b", scalar_to_json(p.hi)}, {"coeffs", coeffs}});
  }
  return Json{{"atoms", atoms}, {"pieces", pieces}};
}

RMeasure measure_from_json(const Json& j) {
  std::vector<Atom> atoms;
  if (j.contains("atoms")) {
    for (const auto& a : j.at("atoms"))
      atoms.push_back({scalar_from_json(a.at("t")), scalar_from_json(a.at("mass"))});
  }
  std::vector<DensityPiece> pieces;
  if (j.contains("pieces")) {
    for (const auto& p : j.at("pieces")) {
      std::vector<Scalar> coeffs;
      for (const auto& c : p.at("coeffs")) coeffs.push_back(scalar_from_json(c));
      pieces.push_back(
          {scalar_from_json(p.at("a")), scalar_from_json(p.at("b")), Polynomial(coeffs)});
    }
  }
  return RMeasure(std::move(atoms), std::move(pieces));
}

Json map_to_json(const PwMap& g) {
  Json segs = Json::array();
  for (const auto& s : g.segments()) {
    Json seg{{"dom", Json::array({scalar_to_json(s.x0), scalar_to_json(s.x1)})},
             {"img", Json::array({scalar_to_json(s.y0), scalar_to_json(s.y1)})}};
    if (const auto* lin = std::get_if<LinearForm>(&s.form)) {
      seg["form"] = Json{{"linear", Json{{"slope", scalar_to_json(lin->slope)}}}};
    } else if (const auto* qf = std::get_if<QuantileForm>(&s.form)) {
      seg["form"] = Json{{"quantile", Json{{"measure", measure_to_json(qf->base)},
                                           {"offset", scalar_to_json(qf->offset)}}}};
    } else {
      throw ValidationError("sampled segments have no serialized form");
    }
    segs.push_back(std::move(seg));
  }
  return Json{{"segments", segs}};
}

PwMap map_from_json(const Json& j) {
  std::vector<Segment> segs;
  for (const auto& s : j.at("segments")) {
    Segment seg{scalar_from_json(s.at("dom").at(0)), scalar_from_json(s.at("dom").at(1)),
                scalar_from_json(s.at("img").at(0)), scalar_from_json(s.at("img").at(1)),
                LinearForm{Scalar(1)}};
    const Json& form = s.at("form");
    if (form.contains("linear")) {
      seg.form = LinearForm{scalar_from_json(form.at("linear").at("slope"))};
    } else if (form.contains("quantile")) {
      seg.form = QuantileForm{measure_from_json(form.at("quantile").at("measure")),
                              scalar_from_json(form.at("quantile").at("offset"))};
    } else {
      throw ValidationError("segment form must be linear or quantile");
    }
    segs.push_back(std::move(seg));
  }
  return PwMap(std::move(segs));
}

Json label_to_json(const CanonicalLabel& label) {
  Json nu = Json::array();
  for (const auto& m : label.nu) nu.push_back(measure_to_json(m));
  return Json{{"nu", nu}, {"nu_inf", measure_to_json(label.nu_inf)}};
}

CanonicalLabel label_from_json(const Json& j) {
  CanonicalLabel label;
  for (const auto& m : j.at("nu")) label.nu.push_back(measure_from_json(m));
  label.nu_inf = measure_from_json(j.at("nu_inf"));
  return label;
}

Json space_description_to_json(const SpaceDescription& d) {
  Json comps = Json::array();
  for (const auto& c : d.components) {
    comps.push_back(Json{{"kind", c.product ? "product" : "line"},
                         {"index", c.index},
                         {"measure", measure_to_json(c.measure)},
                         {"mass", c.mass},
                         {"t_mass", c.t_mass}});
  }
  Json cuts = Json::array();
  for (const auto& c : d.block_cuts) cuts.push_back(scalar_to_json(c));
  return Json{{"components", comps},
              {"total_mass", d.total_mass},
              {"total_t_mass", d.total_t_mass},
              {"blocks", Json{{"level", d.block_level}, {"cuts", cuts}}}};
}

Json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw PreconditionError("cannot open " + path);
  Json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ValidationError("cannot parse " + path + ": " + e.what());
  }
  return j;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw PreconditionError("cannot write " + path);
  out << content;
}

}  // namespace gms
