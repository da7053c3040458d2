#include "flexsusp/coords.hpp"

#include <algorithm>
#include <cmath>

namespace flexsusp {

namespace {

constexpr double kRadicandTol = 1e-12;
constexpr double kTurnTol = 1e-12;
constexpr int kScanPoints = 2048;

void check_signs(const SuspensionParams& p, const SignPattern& s) {
  if (static_cast<int>(s.size()) != p.n - 1) throw Error(ErrorKind::InvalidParams, "sign pattern must have N-1 entries");
  for (std::size_t k = 0; k < s.size(); ++k)
    if (s[k] != 1 && s[k] != -1) throw Error(ErrorKind::InvalidParams, "signs must be +1 or -1", static_cast<int>(k) + 1);
}

double radicand(double l, double m, double z) {
  const double zo = axial_offset(l, m, z);
  return (m * m + l * l) / 2.0 - zo * zo - z * z / 4.0;
}

double turn_cosine(double r_k, double r_next, double L_k, double zoff_k, double zoff_next) {
  const double dz = zoff_next - zoff_k;
  return (r_next * r_next + r_k * r_k - L_k * L_k + dz * dz) / (2.0 * r_k * r_next);
}

}  // namespace

SignPattern default_signs(int n) {
  SignPattern s(n - 1, -1);
  std::fill(s.begin(), s.begin() + std::min(n / 2, n - 1), 1);
  return s;
}

std::vector<Vec3> Embedding::points() const {
  std::vector<Vec3> pts;
  pts.reserve(v.size() + 2);
  pts.push_back(u);
  pts.push_back(w);
  pts.insert(pts.end(), v.begin(), v.end());
  return pts;
}

double axial_offset(double l, double m, double z) { return (m * m - l * l) / (2.0 * z); }

double radial_distance(double l, double m, double z) {
  const double q = radicand(l, m, z);
  if (!(q >= -kRadicandTol * (m * m + l * l) / 2.0)) throw Error(ErrorKind::InfeasibleRadius, "radicand is negative");
  return std::sqrt(std::max(q, 0.0));
}

double turn_angle(double r_k, double r_next, double L_k, double zoff_k, double zoff_next, int* clamped) {
  if (!(r_k > 0 && r_next > 0)) throw Error(ErrorKind::InfeasibleTurn, "vertex on the apex axis");
  double t = turn_cosine(r_k, r_next, L_k, zoff_k, zoff_next);
  if (!(std::abs(t) <= 1.0 + kTurnTol)) throw Error(ErrorKind::InfeasibleTurn, "edge cannot be reached");
  if (std::abs(t) > 1.0) {
    t = std::clamp(t, -1.0, 1.0);
    if (clamped) ++*clamped;
  }
  return std::acos(t);
}

Embedding embed(const SuspensionParams& p, double z, const Theta1Rule& theta1, const SignPattern& signs) {
  require_valid(p);
  check_signs(p, signs);
  if (!(z > 0) || !std::isfinite(z)) throw Error(ErrorKind::InfeasibleRadius, "flexion value must be positive");
  const int n = p.n;
  Embedding e;
  e.z = z;
  e.u = Vec3(0, 0, z / 2);
  e.w = Vec3(0, 0, -z / 2);
  e.r.resize(n);
  e.zoff.resize(n);
  for (int k = 0; k < n; ++k) {
    e.zoff[k] = axial_offset(p.l[k], p.m[k], z);
    try {
      e.r[k] = radial_distance(p.l[k], p.m[k], z);
    } catch (const Error&) {
      throw Error(ErrorKind::InfeasibleRadius, "radicand is negative", k + 1);
    }
  }
  e.turn.resize(n - 1);
  for (int k = 0; k + 1 < n; ++k) {
    try {
      e.turn[k] = turn_angle(e.r[k], e.r[k + 1], p.L[k], e.zoff[k], e.zoff[k + 1], &e.clamped);
    } catch (const Error& err) {
      throw Error(err.kind(), "turn from v_k to v_k+1", k + 1);
    }
  }
  double th = theta1.value;
  if (theta1.kind == Theta1Rule::Kind::SymmetricHalf) {
    double sum = 0;
    for (int k = 0; k < p.half(); ++k) sum += e.turn[k];
    th = (pi - sum) / 2.0;
  }
  e.theta.resize(n);
  e.v.resize(n);
  for (int k = 0; k < n; ++k) {
    if (k > 0) th += signs[k - 1] * e.turn[k - 1];
    e.theta[k] = th;
    e.v[k] = Vec3(e.r[k] * std::cos(th), e.r[k] * std::sin(th), e.zoff[k]);
  }
  return e;
}

double closure_gap(const Embedding& e, double L_N) { return (e.v.back() - e.v.front()).norm() - L_N; }

bool embeddable(const SuspensionParams& p, double z) {
  if (!(z > 0) || !std::isfinite(z)) return false;
  const int n = p.n;
  std::vector<double> r(n), zo(n);
  for (int k = 0; k < n; ++k) {
    const double q = radicand(p.l[k], p.m[k], z);
    if (!(q >= -kRadicandTol * (p.m[k] * p.m[k] + p.l[k] * p.l[k]) / 2.0)) return false;
    r[k] = std::sqrt(std::max(q, 0.0));
    zo[k] = axial_offset(p.l[k], p.m[k], z);
  }
  for (int k = 0; k + 1 < n; ++k) {
    if (!(r[k] > 0 && r[k + 1] > 0)) return false;
    if (!(std::abs(turn_cosine(r[k], r[k + 1], p.L[k], zo[k], zo[k + 1])) <= 1.0 + kTurnTol)) return false;
  }
  return true;
}

namespace {

// Bisect between a feasible and an infeasible flexion value down to adjacent
// doubles; returns the feasible end.
double bisect_edge(const SuspensionParams& p, double feasible_z, double infeasible_z) {
  double good = feasible_z, bad = infeasible_z;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (good + bad);
    if (mid == good || mid == bad) break;
    if (embeddable(p, mid)) good = mid;
    else bad = mid;
  }
  return good;
}

}  // namespace

FlexionInterval flexion_interval(const SuspensionParams& p) {
  require_valid(p);
  double zmax = 0;
  for (int k = 0; k < p.n; ++k) zmax = std::max(zmax, 2.0 * std::sqrt((p.m[k] * p.m[k] + p.l[k] * p.l[k]) / 2.0));

  std::vector<char> ok(kScanPoints);
  auto grid = [&](int i) { return zmax * (i + 1) / kScanPoints; };
  for (int i = 0; i < kScanPoints; ++i) ok[i] = embeddable(p, grid(i));

  int best_a = -1, best_b = -1;
  for (int i = 0; i < kScanPoints;) {
    if (!ok[i]) { ++i; continue; }
    int j = i;
    while (j + 1 < kScanPoints && ok[j + 1]) ++j;
    if (best_a < 0 || j - i > best_b - best_a) best_a = i, best_b = j;
    i = j + 1;
  }
  if (best_a < 0) throw Error(ErrorKind::EmptyInterval, "no feasible flexion value found");

  FlexionInterval iv;
  if (best_a == 0) {
    const double tiny = zmax * 1e-12;
    if (embeddable(p, tiny)) {
      iv.z_lo = 0.0;
      iv.lo_open = true;
    } else {
      iv.z_lo = bisect_edge(p, grid(0), tiny);
    }
  } else {
    iv.z_lo = bisect_edge(p, grid(best_a), grid(best_a - 1));
  }
  iv.z_hi = best_b == kScanPoints - 1 ? grid(best_b) : bisect_edge(p, grid(best_b), grid(best_b + 1));
  return iv;
}

FlexionInterval flexion_interval(const SuspensionParams& p, const Theta1Rule&, const SignPattern& signs) {
  check_signs(p, signs);
  return flexion_interval(p);
}

double dihedral_from_z(double l, double m, double beta, double B, double z) {
  const double den = 2.0 * m * l * std::sin(beta) * std::sin(B);
  if (!(std::abs(den) > 0)) throw Error(ErrorKind::OutOfRange, "face angle at 0 or pi");
  const double c = (l * l + m * m - z * z - 2.0 * m * l * std::cos(beta) * std::cos(B)) / den;
  if (!(std::abs(c) <= 1.0 + 1e-12)) throw Error(ErrorKind::OutOfRange, "cosine outside [-1, 1]");
  return std::acos(std::clamp(c, -1.0, 1.0));
}

std::vector<double> chebyshev_samples(const FlexionInterval& iv, int count, double fraction) {
  const double c = 0.5 * (iv.z_lo + iv.z_hi);
  const double h = 0.5 * iv.width() * fraction * (1.0 - 1e-6);
  std::vector<double> z(count);
  for (int j = 0; j < count; ++j) z[j] = c - h * std::cos((2.0 * j + 1.0) * pi / (2.0 * count));
  return z;
}

}  // namespace flexsusp
