#pragma once

#include "flexsusp/suspension.hpp"

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace flexsusp {

// cot(phi/2); PoleAtZero when phi is a multiple of 2pi.
double cot_half(double phi);

// tan(delta/2) tan(eps/2) and tan(delta/2) / tan(eps/2).
double vp(double delta, double eps);
double vr(double delta, double eps);

// sin((rho-sigma)/2) / sin((rho+sigma)/2) and the cosine analogue.
double sr(double rho, double sigma);
double cr(double rho, double sigma);

enum class Variant { OAE, OAS };

std::string to_string(Variant v);
Variant parse_variant(const std::string& s);
SuspensionType type_of(Variant v);

struct TypeIIIParams {
  Variant variant = Variant::OAS;
  int M = 3;
  double l1 = 1, m1 = 1, l2 = 1, m2 = 1;
  std::vector<double> L_odd;  // L_1, L_3, ..., L_{N-3}
  int fold_L = 0;             // OAE only, 2 < fold_L < N-2

  int n() const { return 2 * M; }
};

// Throws InvalidParams.
void validate(const TypeIIIParams& p);

struct FoldSpec {
  enum class Kind { Open, Compact };
  Kind kind = Kind::Open;
  std::vector<double> delta;
};

std::string to_string(FoldSpec::Kind k);
FoldSpec fold_spec(Variant v, int n, int fold_L, FoldSpec::Kind kind);

enum class Eps1 { HalfPi, ThreeHalfPi };

// One choice made while solving a stage.
struct StageChoice {
  int source = 0;  // which vertex-figure value of the source vertex gave K
  int sign = 1;
  int kase = 1;    // coefficient case
  int root = 1;    // 1: larger |X|
  double K = 0;
};

// Arrays are 0-based (index k-1 holds quantity k); unknown entries are NaN.
struct TypeIIIBuildState {
  TypeIIIParams params;
  std::vector<VertexClass> classes;
  Eps1 eps1 = Eps1::HalfPi;
  double z = 0;   // flexion value fixed by eps_1
  int stage = 1;  // next stage to solve, M once complete
  std::vector<double> l, m, L, L_lower;
  std::vector<double> alpha, beta, gamma, A, B, Gamma;
  std::vector<StageChoice> choices;
  bool closed_form_K = false;  // some vertex figure was infeasible at z
  std::vector<std::pair<std::string, double>> final_residuals;

  bool complete() const { return stage >= params.M; }
  double max_final_residual() const;
  SuspensionParams suspension_params() const;
};

// Seed faces 1 and the angles at v_2. Throws InvalidParams for degenerate
// seed triangles.
TypeIIIBuildState initial_state(const TypeIIIParams& p, Eps1 eps1);

// Flexion value at which eps_1 takes the chosen value.
double eps1_flexion(double l1, double m1, double beta1, double B1, Eps1 eps1);

// The two values of V_P (OAE) or 1/V_R (OAS) that the vertex figure of
// `vertex` (1-based) admits at the state's z, one per mirror placement of
// the previous face. Throws UndefinedDihedral when the vertex figure cannot
// be built at that z.
std::array<double, 2> pair_invariant_K(const TypeIIIBuildState& st, int vertex);

struct StageCoefficients {
  double a = 0, b = 0, c = 0, R = 0;
};

// Quadratic in X(beta_{2k+1}). Throws SingularR.
StageCoefficients stage_coefficients(double qA, double qB, double qC, double K, int kase);

// All surviving extensions of the state by one stage. Each call is one
// search node; `nodes` is incremented per candidate examined.
std::vector<TypeIIIBuildState> solve_stage(const TypeIIIBuildState& st, long* nodes = nullptr);

// Flat-fold angle balances at u (alpha) and w (A). For the fan fold about
// v_1 and v_L the odd-indexed sums split at k_x = floor(L/2) and the
// even-indexed ones at k_x or k_x - 1 by the parity of L; for the circular
// fold the odd- and even-indexed angles each sum to pi.
struct FoldBalance {
  double alpha_odd = 0, alpha_even = 0, A_odd = 0, A_even = 0;

  double max_abs() const;
};

FoldBalance fold_residuals(const FaceAngles& f, int fold_L);
FoldBalance circular_fold_residuals(const FaceAngles& f);

struct FlatState {
  double z = 0;
  bool exists = false;
  double coplanarity = 0;
  double diameter = 0;
  FoldSpec::Kind kind = FoldSpec::Kind::Open;
  double mismatch = 0;  // max circular distance of delta_k to the pattern
  bool ok = false;
};

struct FlatCheck {
  FlatState lo, hi;
  bool ok = false;
  std::string details;
};

// Examines both ends of the flexion interval for the two fold patterns.
FlatCheck check_flat_states(const ConstructedSuspension& s);

struct SignCandidate {
  SignPattern signs;
  double gap = 0;
};

// Every sign pattern with s_1 = +1 and its largest relative closure gap over
// 33 interior samples (theta_1 = 0), smallest gap first.
std::vector<SignCandidate> rank_sign_patterns(const SuspensionParams& p);

struct BuildFailure {
  std::string reason;
  std::vector<std::pair<std::string, double>> residuals;
  long nodes = 0;
};

using BuildResult = std::variant<ConstructedSuspension, BuildFailure>;

BuildResult build_III(const TypeIIIParams& p, long search_budget);

struct GridResult {
  std::optional<ConstructedSuspension> suspension;
  TypeIIIParams params;
  BuildFailure best_failure;
  int seeds_tried = 0;
  long nodes = 0;
};

// Tries every combination of grid values for l_1, m_1, l_2, m_2 and the
// L_odd entries in lexicographic order until one builds.
GridResult build_III_grid(Variant v, int M, const std::vector<double>& values, int fold_L, long budget_per_seed,
                          long total_budget);

}  // namespace flexsusp
