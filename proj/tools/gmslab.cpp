#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "gms/approx.hpp"
#include "gms/cosets.hpp"
#include "gms/examples.hpp"
#include "gms/io.hpp"
#include "gms/topology.hpp"

namespace {

using namespace gms;

struct Options {
  std::string input;
  std::string engine = "split";
  std::string target = "halves";
  std::string measure = "uniform";
  std::string map = "parabola";
  std::string out;
  int depth = 6;
  bool depth_set = false;
  double strip_n = 5.0;
  int grid_n = 1 << 16;
  int n_max = 10;
  int j_max = 64;
  int bins_n = 8;
  double p = 2.0;
  double s = 0.0;
  std::uint64_t seed = 1;
  int samples = 100;
};

PwMap load_map(const std::string& arg) {
  if (std::filesystem::exists(arg)) return map_from_json(load_json_file(arg));
  return fixture_map(arg);
}

RMeasure load_measure(const std::string& arg) {
  if (std::filesystem::exists(arg)) return measure_from_json(load_json_file(arg));
  return fixture_measure(arg);
}

GmsMetricConfig metric_config(const Options& o) {
  GmsMetricConfig cfg;
  cfg.depth = o.depth;
  cfg.strip = StripGrid::standard(o.strip_n);
  return cfg;
}

std::string config_echo(const std::string& command, const Options& o) {
  std::ostringstream os;
  os << "# config: command=" << command << " depth=" << o.depth << " strip_n=" << o.strip_n
     << " grid_n=" << o.grid_n << " n_max=" << o.n_max << " j_max=" << o.j_max
     << " bins_N=" << o.bins_n << " p=" << o.p << " s=" << o.s << " seed=" << o.seed;
  return os.str();
}

std::string default_out(const std::string& command, const char* ext) {
  return "gmslab-" + command + ext;
}

void run_canon(const Options& o) {
  const PwMap g = load_map(o.input);
  const CanonicalLabel label = canonical_form(g);
  const RokhlinInvariants inv = rokhlin_invariants(g);

  Json out;
  out["label"] = label_to_json(label);
  out["space"] = space_description_to_json(canonical_space_description(label));
  const std::string prefix = o.out.empty() ? default_out("canon", "") : o.out;
  write_text_file(prefix + ".label.json", out.dump(2) + "\n");

  std::ostringstream csv;
  csv << config_echo("canon", o) << " input=" << o.input << "\n";
  csv << "y";
  for (int k = 1; k <= inv.depth(); ++k) csv << ",F" << k;
  csv << ",F\n";
  double lo = 0.0, hi = 2.0;
  if (auto b = inv.full.support_bounds()) {
    lo = 0.9 * b->first;
    hi = 1.1 * b->second;
  }
  const int rows = 1000;
  for (int i = 0; i <= rows; ++i) {
    const double y = lo + (hi - lo) * i / rows;
    csv << format_double(y);
    for (int k = 1; k <= inv.depth(); ++k) csv << "," << format_double(inv.Fn(k, y));
    csv << "," << format_double(inv.F(y)) << "\n";
  }
  write_text_file(prefix + ".invariants.csv", csv.str());
  std::cout << "wrote " << prefix << ".label.json and " << prefix << ".invariants.csv\n";
}

void run_section(const Options& o) {
  const RMeasure nu = load_measure(o.input);
  const PwMap psi = convex_section(nu);
  const std::string out = o.out.empty() ? default_out("section", ".map.json") : o.out;
  write_text_file(out, map_to_json(psi).dump(2) + "\n");
  std::cout << "wrote " << out << "\n";
}

void blockmap_csv(std::ostringstream& csv, int stage, const BlockMap& bm, const StripGrid& strip) {
  const double distance = blockmap_distance(bm, strip);
  csv << stage << ",-1,-1,,,," << format_double(distance) << "\n";
  for (const auto& row : blockmap_rows(bm, strip)) {
    csv << stage << "," << row.component << "," << row.block << ","
        << format_double(row.mass_residual) << "," << format_double(row.support_lo) << ","
        << format_double(row.support_hi) << "," << format_double(row.block_distance) << "\n";
  }
}

void run_converge(Options o) {
  std::ostringstream csv;
  std::string out = o.out;
  if (o.engine == "split" || o.engine == "spread" || o.engine == "closure") {
    const RMeasure nu = load_measure(o.measure);
    const StripGrid strip = StripGrid::standard(o.strip_n);
    csv << config_echo("converge", o) << " engine=" << o.engine << " nu=" << o.measure
        << "\n";
    csv << "stage,component,block,mass_residual,support_lo,support_hi,distance\n";
    if (o.engine == "split") {
      const RMeasure half = nu.scaled(Scalar::ratio(1, 2));
      for (int n = 2; n <= o.n_max; ++n)
        blockmap_csv(csv, n, splitting_theta(nu, half, half, n), strip);
    } else if (o.engine == "spread") {
      for (int n = 1; n <= o.n_max; ++n) blockmap_csv(csv, n, spreading_upsilon(nu, n), strip);
    } else {
      CanonicalLabel target;
      if (o.target == "halves") {
        target.nu = {nu.scaled(Scalar::ratio(1, 2)), nu.scaled(Scalar::ratio(1, 2))};
      } else if (o.target == "product") {
        target.nu_inf = nu;
      } else {
        throw PreconditionError("closure target must be halves or product");
      }
      for (int k = 1; k <= o.n_max; ++k)
        blockmap_csv(csv, k, closure_composer(nu, target, k), strip);
    }
  } else if (o.engine == "discretize") {
    const PwMap g = load_map(o.map);
    const GmsMetricConfig cfg = metric_config(o);
    csv << config_echo("converge", o) << " engine=discretize map=" << o.map << "\n";
    csv << "N,distance,segments\n";
    for (int N = 1; N <= o.bins_n; ++N) {
      const PwMap gN = discretize_gms(g, N);
      csv << N << "," << format_double(gms_distance(gN, g, cfg)) << "," << gN.segments().size()
          << "\n";
    }
  } else if (o.engine == "oscillation") {
    if (!o.depth_set) o.depth = 3;  // whole oscillation periods per cell for dyadic j
    const GmsMetricConfig cfg = metric_config(o);
    csv << config_echo("converge", o) << " engine=oscillation\n";
    csv << "j,matrix_element_error,t1_norm_defect,gms_to_identity\n";
    for (const auto& row : weak_not_strong_demo(o.j_max, cfg, o.grid_n)) {
      csv << row.j << "," << format_double(row.matrix_element_error) << ","
          << format_double(row.t1_norm_defect) << "," << format_double(row.gms_to_identity)
          << "\n";
    }
  } else if (o.engine == "doubling") {
    const GridFunction f = GridFunction::sample(
        o.grid_n, [](double x) { return std::sin(2.0 * M_PI * x); }, o.p);
    csv << config_echo("converge", o) << " engine=doubling\n";
    csv << "n,sup_to_doubling,operator_gap,measure_preserving\n";
    for (const auto& row : doubling_closure_demo(o.n_max, f, o.p)) {
      csv << row.n << "," << format_double(row.sup_to_doubling) << ","
          << format_double(row.operator_gap) << "," << (row.measure_preserving ? 1 : 0) << "\n";
    }
  } else {
    throw PreconditionError("unknown engine '" + o.engine +
                            "' (split, spread, closure, discretize, oscillation, doubling)");
  }
  if (out.empty()) out = default_out("converge-" + o.engine, ".csv");
  write_text_file(out, csv.str());
  std::cout << "wrote " << out << "\n";
}

void run_quotient_check(const Options& o) {
  const StripGrid strip = StripGrid::standard(o.strip_n);
  const auto phi = [](const PwMap& g) {
    return rn_distribution(g, IntervalSet::whole(), IntervalSet::whole());
  };

  Json report;
  report["seed"] = o.seed;
  report["samples"] = o.samples;

  Json biinv = Json::array();
  std::uint64_t ctr = o.seed;
  for (const std::string name : {"twoslope", "parabola", "twocopy"}) {
    const PwMap g = fixture_map(name);
    const RMeasure base_law = phi(g);
    double worst = 0.0;
    for (int i = 0; i < o.samples; ++i) {
      const std::uint64_t su = ctr++;
      const std::uint64_t sv = ctr++;
      const PwMap u = random_interval_exchange(su, 2 + static_cast<int>(su % 6));
      const PwMap v = random_interval_exchange(sv, 2 + static_cast<int>(sv % 6));
      const PwMap conj = compose(u, compose(g, v));
      worst = std::max(worst, measure_distance(phi(conj), base_law, strip));
    }
    biinv.push_back(Json{{"map", name}, {"max_functional_deviation", worst}});
  }
  report["biinvariance"] = biinv;

  const PwMap psi = fixture_map("parabola");
  const PwMap h2 = fixture_map("twocopy");
  const double phi_gap = measure_distance(phi(psi), phi(h2), strip);
  const bool same = same_double_coset(psi, h2);
  report["quotient_vs_cosets"] =
      Json{{"phi_distance", phi_gap},
           {"same_double_coset", same},
           {"quotient_identifies_distinct_cosets", phi_gap <= 1e-10 && !same}};

  const double sep = measure_distance(phi(fixture_map("twoslope")), phi(identity_map()), strip);
  report["phi_separates"] = Json{{"phi_distance", sep}, {"nonzero", sep > 1e-6}};

  const std::string out = o.out.empty() ? default_out("quotient-check", ".json") : o.out;
  write_text_file(out, report.dump(2) + "\n");
  std::cout << "wrote " << out << "\n";
}

void run_operator_check(const Options& o) {
  const PwMap g = load_map(o.map);
  std::vector<std::pair<double, double>> ps = {{1, 0}, {2, 0}, {3, 0}, {1, 0.7}, {2, 0.7}, {3, 0.7}};
  if (std::none_of(ps.begin(), ps.end(), [&](const auto& q) {
        return q.first == o.p && q.second == o.s;
      }))
    ps.emplace_back(o.p, o.s);

  const auto cells = dyadic_partition(2);
  std::ostringstream csv;
  csv << config_echo("operator-check", o) << " map=" << o.map << "\n";
  csv << "p,s,isometry_defect,max_matrix_element_disagreement\n";
  for (const auto& [p, s] : ps) {
    const GridFunction f = GridFunction::sample(
        o.grid_n, [](double x) { return std::sin(2.0 * M_PI * x) + 2.0; }, p);
    const double defect = isometry_defect(g, f, p, s);
    double worst = 0.0;
    for (const auto& A : cells)
      for (const auto& B : cells)
        worst = std::max(worst, matrix_element(g, A, B, p, s, o.grid_n).disagreement);
    csv << format_double(p) << "," << format_double(s) << "," << format_double(defect) << ","
        << format_double(worst) << "\n";
  }
  const std::string out = o.out.empty() ? default_out("operator-check", ".csv") : o.out;
  write_text_file(out, csv.str());
  std::cout << "wrote " << out << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"derivative-law toolkit for measure-class preserving interval maps"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&o](CLI::App* cmd) {
    cmd->add_option("--depth", o.depth, "dyadic partition depth of the metric");
    cmd->add_option("--strip-n", o.strip_n, "imaginary extent of the strip grid");
    cmd->add_option("--grid-n", o.grid_n, "grid resolution for operator evaluations");
    cmd->add_option("--n-max", o.n_max, "last stage of a sequence");
    cmd->add_option("--j-max", o.j_max, "last oscillation index");
    cmd->add_option("--bins-N", o.bins_n, "value-bin resolution exponent");
    cmd->add_option("--p", o.p, "integrability exponent");
    cmd->add_option("--s", o.s, "imaginary exponent offset");
    cmd->add_option("--seed", o.seed, "random seed");
    cmd->add_option("--out", o.out, "output path (or prefix for canon)");
  };

  auto* canon = app.add_subcommand("canon", "canonical double-coset label of a map");
  canon->add_option("input", o.input, "map JSON file or fixture name")->required();
  add_common(canon);

  auto* section = app.add_subcommand("section", "convex map with a prescribed derivative law");
  section->add_option("input", o.input, "measure JSON file or fixture name")->required();
  add_common(section);

  auto* converge = app.add_subcommand("converge", "run an approximation sequence");
  converge->add_option("--engine", o.engine, "split, spread, closure, discretize, oscillation, doubling");
  converge->add_option("--target", o.target, "closure target: halves or product");
  converge->add_option("--nu", o.measure, "law fixture or JSON path for the measure engines");
  converge->add_option("--map", o.map, "map fixture or JSON path");
  add_common(converge);

  auto* quotient = app.add_subcommand("quotient-check", "biinvariance and quotient experiments");
  quotient->add_option("--samples", o.samples, "random conjugation samples");
  add_common(quotient);

  auto* opcheck = app.add_subcommand("operator-check", "isometry and matrix-element tables");
  opcheck->add_option("--map", o.map, "map fixture or JSON path");
  add_common(opcheck);

  CLI11_PARSE(app, argc, argv);
  o.depth_set = converge->count("--depth") > 0;

  try {
    if (app.got_subcommand(canon)) run_canon(o);
    if (app.got_subcommand(section)) run_section(o);
    if (app.got_subcommand(converge)) run_converge(o);
    if (app.got_subcommand(quotient)) run_quotient_check(o);
    if (app.got_subcommand(opcheck)) run_operator_check(o);
  } catch (const gms::PreconditionError& e) {
    std::cerr << gms::Json{{"error", {{"type", "precondition"}, {"message", e.what()}}}}.dump()
              << "\n";
    return 2;
  } catch (const gms::ValidationError& e) {
    std::cerr << gms::Json{{"error", {{"type", "validation"}, {"message", e.what()}}}}.dump()
              << "\n";
    return 2;
  } catch (const gms::NumericError& e) {
    std::cerr << gms::Json{{"error", {{"type", "numeric"}, {"message", e.what()}}}}.dump() << "\n";
    return 3;
  }
  return 0;
}
