#pragma once

#include "flexsusp/suspension.hpp"

#include <string>
#include <vector>

namespace flexsusp {

// Interior dihedral in [0, 2pi) along edge a->b between the face that runs
// a->b (third vertex c1) and the face that runs b->a (third vertex c2), for
// faces wound so their right-hand normals point out of the solid.
double interior_dihedral(const Vec3& a, const Vec3& b, const Vec3& c1, const Vec3& c2);

struct Dihedrals {
  std::vector<double> eps;    // edge v_k v_{k+1}
  std::vector<double> delta;  // edge u v_k
  std::vector<double> Delta;  // edge w v_k
};

Dihedrals dihedrals(const Embedding& e);

struct DihedralTrace {
  FlexionInterval interval;
  std::vector<double> z;
  std::vector<std::vector<double>> eps, delta, Delta;  // [sample][k]
  std::vector<double> volume;
  std::vector<double> gap;
  std::vector<char> feasible;
  std::vector<double> eq3_deviation;  // max_k |coordinate eps_k folded to [0, pi] - eps_k from z|
  double diameter = 0.0;              // largest point-set diameter over the samples

  int samples() const { return static_cast<int>(z.size()); }
  int feasible_count() const;
};

DihedralTrace dihedral_trace(const ConstructedSuspension& s, const std::vector<double>& z);
// Chebyshev samples over the central `fraction` of the flexion interval.
DihedralTrace dihedral_trace(const ConstructedSuspension& s, int samples = 33, double fraction = 1.0);

struct VerifyOptions {
  int samples = 33;
  double tol = 1e-9;
  double strong_threshold = 1e-3;
};

struct FlexVerdict {
  bool flexible = false;
  bool inconclusive = false;
  double max_rel_gap_deviation = 0.0;
  bool strong = false;
  double min_dihedral_range = 0.0;
  double volume_max_abs = 0.0;
  bool bellows = false;
  double eq3_max_deviation = 0.0;
  int feasible_samples = 0;
  FlexionInterval interval;
  std::string details;
};

FlexVerdict verify_flexible(const ConstructedSuspension& s, const VerifyOptions& opt = {});

// Range of a sampled angle after removing 2pi jumps between samples.
double unwrapped_range(const std::vector<double>& angles);
double min_dihedral_range(const DihedralTrace& t);
bool strong_flexibility(const DihedralTrace& t, double threshold = 1e-3);

// (1/6) sum of triple products over the 2N faces, upper faces (u, v_{k+1}, v_k)
// and lower faces (w, v_k, v_{k+1}).
double signed_volume(const Embedding& e);
double signed_volume(const std::vector<Vec3>& points_uwv);

// Sum of the tetrahedron contributions of each face and its symmetry
// partner; one entry per pair.
std::vector<double> face_pair_cancellation(const Embedding& e, SuspensionType t);

double diameter(const std::vector<Vec3>& pts);

// Volume constant across the trace within 1e-9 diameter^3 and, when
// expect_zero, that constant is 0.
bool bellows_check(const DihedralTrace& t, bool expect_zero = true);

struct RankResult {
  int rank = 0;
  int flex_dim = 0;
  std::vector<double> singular_values;
};

RankResult rigidity_jacobian_rank(const std::vector<Vec3>& points_uwv);
RankResult rigidity_jacobian_rank(const Embedding& e);

// Smallest singular value of the centred coordinate matrix.
double coplanarity(const std::vector<Vec3>& pts);

// V_P for an OAE vertex; tan(eps/2)/tan(delta/2) for an OAS vertex.
double vertex_value(double delta, double eps, VertexClass c);

struct TetrahedralResiduals {
  // Per vertex, maximised over samples.
  std::vector<double> branch;         // min over the two identities for the vertex class
  std::vector<double> branch_printed; // same with the identities exactly as printed
  std::vector<int> branch_used;       // 0: C_R branch, 1: S_R branch, -1 none
  std::vector<bool> branch_constant;
  std::vector<double> eps_reduction;    // |cos eps_{k-1} - cos eps_k|
  std::vector<double> delta_reduction;  // |cos delta_k - cos Delta_k|
  std::vector<double> opposite_eps;     // raw opposite-dihedral equation at v_k
  std::vector<double> opposite_delta;
  std::vector<std::pair<int, int>> pairs;  // 1-based vertex pairs
  std::vector<double> pair_residual;       // | |value_i| - |value_j| | relative
  int poles = 0;

  double max_branch() const;
  double max_reduction() const;
  double max_pair() const;
  bool all_constant() const;
};

TetrahedralResiduals tetrahedral_angle_residuals(const ConstructedSuspension& s, const DihedralTrace& t);

}  // namespace flexsusp
