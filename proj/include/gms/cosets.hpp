#pragma once

#include <vector>

#include "gms/measure.hpp"
#include "gms/pw_map.hpp"

namespace gms {

// Metric classification data of a derivative function: F is the distribution
// function of the derivative law, F_n the largest mass of a set meeting every
// level at most n times.  Stored as measures; F_n(y) = partial[n-1].cdf(y).
struct RokhlinInvariants {
  RMeasure full;                  // measure behind F
  std::vector<RMeasure> partial;  // partial[n-1] integrates to F_n, n = 1..K

  int depth() const { return static_cast<int>(partial.size()); }
  double F(double y) const { return full.cdf(y); }
  double Fn(int n, double y) const;
};

// Level-set decomposition of the derivative law: nu[0] >= nu[1] >= ... are
// the continuous finite-multiplicity layers, nu_inf collects the values
// attained on sets of positive measure.
struct CanonicalLabel {
  std::vector<RMeasure> nu;
  RMeasure nu_inf;

  RMeasure total() const;
  bool equals(const CanonicalLabel& other, double tol = 1e-10) const;
};

// Requires every segment derivative to be constant or strictly increasing
// (no sampled segments).
RokhlinInvariants rokhlin_invariants(const PwMap& g);
CanonicalLabel canonical_form(const PwMap& g);

CanonicalLabel label_from_invariants(const RokhlinInvariants& inv);
RokhlinInvariants invariants_from_label(const CanonicalLabel& label);

bool same_double_coset(const PwMap& g, const PwMap& h, double tol = 1e-10);

// Smallest value of F_k - 2 F_{k+1} + F_{k+2} over the stored triples and a
// y-grid; 0 when fewer than three partial invariants exist.
double rokhlin_triple_min(const RokhlinInvariants& inv, int grid_points = 1000);

struct SpaceComponent {
  bool product = false;  // line component when false, half-line x [0,1] when true
  int index = 0;         // 1-based line index; 0 for the product component
  RMeasure measure;
  double mass = 0.0;
  double t_mass = 0.0;
};

// Serializable description of the model space the label identifies, with
// plain and t-weighted component masses and the value-block partition the
// approximation engines run on.
struct SpaceDescription {
  std::vector<SpaceComponent> components;
  double total_mass = 0.0;
  double total_t_mass = 0.0;
  int block_level = 0;
  std::vector<Scalar> block_cuts;
};

SpaceDescription canonical_space_description(const CanonicalLabel& label, int block_level = 2);

}  // namespace gms
