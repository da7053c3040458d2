#include "flexsusp/type3.hpp"

#include "flexsusp/analysis.hpp"
#include "flexsusp/text.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>

namespace flexsusp {

namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();
constexpr double inf = std::numeric_limits<double>::infinity();
constexpr double kResidualTol = 1e-8;
constexpr double kGapTol = 1e-8;
constexpr double kCoplanarTol = 1e-8;
constexpr double kPatternTol = 1e-6;

// Distance of phi from the nearest multiple of 2pi.
double off_multiple(double phi) { return std::abs(std::remainder(phi, 2 * pi)); }

double tan_half(double phi, double pole_tol) {
  if (off_multiple(phi - pi) <= pole_tol) throw Error(ErrorKind::PoleError, "tangent pole at pi");
  return std::tan(phi / 2);
}

double circular_distance(double a, double b) { return off_multiple(a - b); }

// OAE: opposite angles equal; OAS: supplementary.
double partner(double x, VertexClass c) { return c == VertexClass::OAE ? x : pi - x; }

bool in_open_angle(double x) { return x > 0 && x < pi; }

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace

double cot_half(double phi) {
  if (off_multiple(phi) <= 1e-12) throw Error(ErrorKind::PoleAtZero, "cot(phi/2) at phi = 0 mod 2pi");
  return std::cos(phi / 2) / std::sin(phi / 2);
}

double vp(double delta, double eps) { return tan_half(delta, 1e-9) * tan_half(eps, 1e-9); }

double vr(double delta, double eps) {
  if (off_multiple(eps) <= 1e-9) throw Error(ErrorKind::PoleError, "V_R with eps at 0");
  return tan_half(delta, 1e-9) / tan_half(eps, 1e-9);
}

double sr(double rho, double sigma) {
  const double d = std::sin((rho + sigma) / 2);
  if (std::abs(d) <= 1e-12) throw Error(ErrorKind::PoleError, "S_R denominator vanishes");
  return std::sin((rho - sigma) / 2) / d;
}

double cr(double rho, double sigma) {
  const double d = std::cos((rho + sigma) / 2);
  if (std::abs(d) <= 1e-12) throw Error(ErrorKind::PoleError, "C_R denominator vanishes");
  return std::cos((rho - sigma) / 2) / d;
}

std::string to_string(Variant v) { return v == Variant::OAE ? "OAE" : "OAS"; }

Variant parse_variant(const std::string& s) {
  std::string u;
  for (char c : s) u += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (u == "OAE") return Variant::OAE;
  if (u == "OAS") return Variant::OAS;
  throw Error(ErrorKind::InvalidParams, "unknown variant '" + s + "'");
}

SuspensionType type_of(Variant v) { return v == Variant::OAE ? SuspensionType::III_OAE : SuspensionType::III_OAS; }

std::vector<VertexClass> vertex_classes(SuspensionType t, int n, std::optional<int> fold_L) {
  std::vector<VertexClass> c(n, VertexClass::OAE);
  if (t == SuspensionType::III_OAS) return c;
  if (t != SuspensionType::III_OAE)
    throw Error(ErrorKind::ClassificationUnavailable, "vertex classes exist for Type III only");
  if (!fold_L || *fold_L <= 2 || *fold_L >= n - 2)
    throw Error(ErrorKind::ClassificationUnavailable, "III-OAE needs a fold index 2 < L < N-2");
  c[0] = VertexClass::OAS;
  c[*fold_L - 1] = VertexClass::OAS;
  return c;
}

std::vector<VertexClass> vertex_classes(const ConstructedSuspension& s) {
  return vertex_classes(s.type, s.params.n, s.fold_L);
}

void validate(const TypeIIIParams& p) {
  if (p.M <= 2) throw Error(ErrorKind::InvalidParams, "M must exceed 2");
  for (double x : {p.l1, p.m1, p.l2, p.m2})
    if (!std::isfinite(x) || x <= 0) throw Error(ErrorKind::InvalidParams, "seed lengths must be positive");
  if (static_cast<int>(p.L_odd.size()) != p.M - 1)
    throw Error(ErrorKind::InvalidParams, "L_odd needs M-1 entries (L_1, L_3, ..., L_{N-3})");
  for (std::size_t i = 0; i < p.L_odd.size(); ++i)
    if (!std::isfinite(p.L_odd[i]) || p.L_odd[i] <= 0)
      throw Error(ErrorKind::InvalidParams, "L_odd entries must be positive", static_cast<int>(2 * i + 1));
  if (p.variant == Variant::OAE && (p.fold_L <= 2 || p.fold_L >= p.n() - 2))
    throw Error(ErrorKind::InvalidParams, "fold_L must satisfy 2 < L < N-2");
}

std::string to_string(FoldSpec::Kind k) { return k == FoldSpec::Kind::Open ? "open" : "compact"; }

FoldSpec fold_spec(Variant v, int n, int fold_L, FoldSpec::Kind kind) {
  const double flat = kind == FoldSpec::Kind::Open ? pi : 0.0;
  const double hinge = kind == FoldSpec::Kind::Open ? 0.0 : pi;
  FoldSpec f{kind, std::vector<double>(n, flat)};
  if (v == Variant::OAE) {
    if (fold_L <= 2 || fold_L >= n - 2) throw Error(ErrorKind::InvalidParams, "fold_L must satisfy 2 < L < N-2");
    f.delta[0] = hinge;
    f.delta[fold_L - 1] = hinge;
  }
  return f;
}

double TypeIIIBuildState::max_final_residual() const {
  double r = 0;
  for (const auto& [name, value] : final_residuals) r = std::max(r, std::isfinite(value) ? std::abs(value) : inf);
  return final_residuals.empty() ? inf : r;
}

SuspensionParams TypeIIIBuildState::suspension_params() const {
  SuspensionParams p;
  p.n = params.n();
  p.l = l;
  p.m = m;
  p.L = L;
  return p;
}

double eps1_flexion(double l1, double m1, double beta1, double B1, Eps1 eps1) {
  const double e = eps1 == Eps1::HalfPi ? pi / 2 : 3 * pi / 2;
  const double z2 = l1 * l1 + m1 * m1 -
                    2 * m1 * l1 * (std::cos(beta1) * std::cos(B1) + std::sin(beta1) * std::sin(B1) * std::cos(e));
  if (!(z2 > 0)) throw Error(ErrorKind::UndefinedDihedral, "eps_1 gives no positive flexion value");
  return std::sqrt(z2);
}

TypeIIIBuildState initial_state(const TypeIIIParams& p, Eps1 eps1) {
  validate(p);
  const int n = p.n();
  TypeIIIBuildState st;
  st.params = p;
  st.classes = vertex_classes(type_of(p.variant), n, p.variant == Variant::OAE ? std::optional<int>(p.fold_L)
                                                                                : std::nullopt);
  st.eps1 = eps1;
  for (auto* v : {&st.l, &st.m, &st.L, &st.L_lower, &st.alpha, &st.beta, &st.gamma, &st.A, &st.B, &st.Gamma})
    v->assign(n, nan);
  st.l[0] = p.l1;
  st.m[0] = p.m1;
  st.l[1] = p.l2;
  st.m[1] = p.m2;
  st.L[0] = st.L_lower[0] = p.L_odd[0];
  try {
    st.beta[0] = face_angle(p.l1, p.L_odd[0], p.l2);
    st.gamma[0] = face_angle(p.l2, p.L_odd[0], p.l1);
    st.B[0] = face_angle(p.m1, p.L_odd[0], p.m2);
    st.Gamma[0] = face_angle(p.m2, p.L_odd[0], p.m1);
  } catch (const Error&) {
    throw Error(ErrorKind::InvalidParams, "seed faces (l_1, l_2, L_1) and (m_1, m_2, L_1) must be triangles");
  }
  st.alpha[0] = pi - st.beta[0] - st.gamma[0];
  st.A[0] = pi - st.B[0] - st.Gamma[0];
  st.beta[1] = partner(st.Gamma[0], st.classes[1]);
  st.B[1] = partner(st.gamma[0], st.classes[1]);
  st.z = eps1_flexion(p.l1, p.m1, st.beta[0], st.B[0], eps1);
  return st;
}

std::array<double, 2> pair_invariant_K(const TypeIIIBuildState& st, int vertex) {
  const int n = st.params.n(), i = vertex - 1;
  const double l = st.l[i], m = st.m[i], z = st.z;
  const double be = st.beta[i], Be = st.B[i];
  double ga, Ga;
  if (i == 0) {
    ga = partner(Be, st.classes[0]);
    Ga = partner(be, st.classes[0]);
  } else {
    ga = st.gamma[wrap(i - 1, n)];
    Ga = st.Gamma[wrap(i - 1, n)];
  }
  if (!std::isfinite(l * m * be * Be * ga * Ga)) throw Error(ErrorKind::UndefinedDihedral, "vertex figure incomplete");

  const double cphi = (l * l + m * m - z * z) / (2 * l * m);
  if (!(std::abs(cphi) < 1)) throw Error(ErrorKind::UndefinedDihedral, "apex angle undefined at this z", vertex);
  const double sphi = std::sqrt(1 - cphi * cphi);
  const Vec3 eu(0, 0, 1), ew(sphi, 0, cphi), o = Vec3::Zero();

  // Unit direction at angle a from eu and b from ew, on the side `side`.
  auto place = [&](double a, double b, int side) {
    double c = (std::cos(b) - cphi * std::cos(a)) / (sphi * std::sin(a));
    if (!(std::abs(c) <= 1 + 1e-12)) throw Error(ErrorKind::UndefinedDihedral, "face cannot meet at this z", vertex);
    const double psi = side * std::acos(std::clamp(c, -1.0, 1.0));
    return Vec3(std::sin(a) * std::cos(psi), std::sin(a) * std::sin(psi), std::cos(a));
  };

  const Vec3 next = place(be, Be, 1);
  std::array<double, 2> out{};
  for (int s = 0; s < 2; ++s) {
    const Vec3 prev = place(ga, Ga, s == 0 ? 1 : -1);
    const double delta = interior_dihedral(eu, o, prev, next);
    const double eps = interior_dihedral(o, next, ew, eu);
    out[s] = vertex_value(delta, eps, st.classes[i]);
  }
  return out;
}

StageCoefficients stage_coefficients(double qA, double qB, double qC, double K, int kase) {
  StageCoefficients s;
  if (kase == 1) {
    if (std::abs(1 + K) <= 1e-12) throw Error(ErrorKind::SingularR, "K = -1 in case 1");
    s.R = (1 - K) / (1 + K);
    s.a = qC * s.R * s.R + qB * s.R;
    s.b = -2 * qA * s.R;
    s.c = -qB * s.R - qC;
  } else if (kase == 2) {
    if (std::abs(K - 1) <= 1e-12) throw Error(ErrorKind::SingularR, "K = 1 in case 2");
    s.R = (1 + K) / (K - 1);
    s.a = qB * s.R - qC;
    s.b = -2 * qA * s.R;
    s.c = qC * s.R * s.R - qB * s.R;
  } else {
    throw Error(ErrorKind::InvalidParams, "case must be 1 or 2");
  }
  return s;
}

namespace {

// Completes the final stage in place; false when a face fails to exist.
bool close_final_stage(TypeIIIBuildState& st, int j) {
  const auto& p = st.params;
  const int n = p.n();
  FaceAngles fa;
  fa.alpha = st.alpha;
  fa.A = st.A;
  // The forced angles come from the fold balance with the last two entries
  // still unknown, so evaluate it with zeros there and solve.
  fa.alpha[j] = fa.alpha[n - 1] = 0;
  fa.A[j] = fa.A[n - 1] = 0;
  const FoldBalance fb = p.variant == Variant::OAS ? circular_fold_residuals(fa) : fold_residuals(fa, p.fold_L);
  // The unknowns enter the balances with coefficient -1 (fan) or +1 (circle).
  const double sgn = p.variant == Variant::OAS ? -1.0 : 1.0;
  st.alpha[j] = sgn * fb.alpha_odd;
  st.alpha[n - 1] = sgn * fb.alpha_even;
  st.A[j] = sgn * fb.A_odd;
  st.A[n - 1] = sgn * fb.A_even;

  st.gamma[j] = pi - st.alpha[j] - st.beta[j];
  st.Gamma[j] = pi - st.A[j] - st.B[j];
  for (double x : {st.alpha[j], st.A[j], st.gamma[j], st.Gamma[j], st.alpha[n - 1], st.A[n - 1]})
    if (!in_open_angle(x)) return false;

  st.L[j] = st.l[j] * std::sin(st.alpha[j]) / std::sin(st.gamma[j]);
  st.L_lower[j] = st.m[j] * std::sin(st.A[j]) / std::sin(st.Gamma[j]);
  st.l[n - 1] = st.l[j] * std::sin(st.beta[j]) / std::sin(st.gamma[j]);
  st.m[n - 1] = st.m[j] * std::sin(st.B[j]) / std::sin(st.Gamma[j]);
  const double LN = std::sqrt(st.l[n - 1] * st.l[n - 1] + p.l1 * p.l1 - 2 * st.l[n - 1] * p.l1 * std::cos(st.alpha[n - 1]));
  const double LNw = std::sqrt(st.m[n - 1] * st.m[n - 1] + p.m1 * p.m1 - 2 * st.m[n - 1] * p.m1 * std::cos(st.A[n - 1]));
  st.L[n - 1] = LN;
  st.L_lower[n - 1] = LNw;
  try {
    st.beta[n - 1] = face_angle(st.l[n - 1], LN, p.l1);
    st.gamma[n - 1] = face_angle(p.l1, LN, st.l[n - 1]);
    st.B[n - 1] = face_angle(st.m[n - 1], LNw, p.m1);
    st.Gamma[n - 1] = face_angle(p.m1, LNw, st.m[n - 1]);
  } catch (const Error&) {
    return false;
  }

  const auto& c = st.classes;
  double pair = inf;
  try {
    const double a[2] = {cr(st.B[n - 3], st.beta[n - 3]), sr(st.B[n - 3], st.beta[n - 3])};
    const double b[2] = {cr(st.B[n - 1], st.beta[n - 1]), sr(st.B[n - 1], st.beta[n - 1])};
    for (double x : a)
      for (double y : b) pair = std::min(pair, rel(std::abs(y), std::abs(x)));
  } catch (const Error&) {
  }
  st.final_residuals = {
      {"L_{N-1} upper vs lower", (st.L[j] - st.L_lower[j]) / st.L[j]},
      {"L_N upper vs lower", (LN - LNw) / LN},
      {"gamma_N vs B_1", st.gamma[n - 1] - partner(st.B[0], c[0])},
      {"Gamma_N vs beta_1", st.Gamma[n - 1] - partner(st.beta[0], c[0])},
      {"beta_N vs Gamma_{N-1}", st.beta[n - 1] - partner(st.Gamma[j], c[n - 1])},
      {"B_N vs gamma_{N-1}", st.B[n - 1] - partner(st.gamma[j], c[n - 1])},
      {"pair (N-2, N)", pair},
  };
  return true;
}

}  // namespace

std::vector<TypeIIIBuildState> solve_stage(const TypeIIIBuildState& st, long* nodes) {
  std::vector<TypeIIIBuildState> out;
  if (st.complete()) return out;
  const auto& p = st.params;
  const int M = p.M, k = st.stage;
  const int e = 2 * k - 1;  // index of vertex 2k
  const int j = 2 * k;      // index of vertex 2k+1
  const int src = k == 1 ? 1 : 2 * k - 2;
  const double sigma = st.classes[j] == VertexClass::OAE ? 1.0 : -1.0;

  std::array<double, 2> values{};
  bool closed_form = false;
  try {
    values = pair_invariant_K(st, src);
  } catch (const Error&) {
    // Fall back on the closed-form values the vertex figure would produce.
    values = {cr(st.B[src - 1], st.beta[src - 1]), sr(st.B[src - 1], st.beta[src - 1])};
    closed_form = true;
  }

  const double le = st.l[e], me = st.m[e], be = st.beta[e], Be = st.B[e];
  const double qA = le * std::cos(be) - me * std::cos(Be);
  const double qB = me * std::sin(Be);
  const double qC = -le * std::sin(be);

  for (int source = 0; source < 2; ++source) {
    if (source == 1 && std::abs(values[1] - values[0]) <= 1e-12 * std::max(1.0, std::abs(values[0]))) continue;
    for (int sign : {1, -1}) {
      const double K = sign * values[source];
      for (int kase : {1, 2}) {
        StageCoefficients co;
        try {
          co = stage_coefficients(qA, qB, qC, K, kase);
        } catch (const Error&) {
          if (nodes) ++*nodes;
          continue;
        }
        const double a = co.a, b = sigma * co.b, c = co.c;
        const double disc = b * b - 4 * a * c;
        const double scale = std::max({std::abs(a), std::abs(b), std::abs(c)});
        if (!(std::abs(a) > 1e-14 * scale) || !(disc >= -1e-12 * scale * scale)) {
          if (nodes) *nodes += 2;
          continue;
        }
        const double sq = std::sqrt(std::max(disc, 0.0));
        double roots[2] = {(-b + sq) / (2 * a), (-b - sq) / (2 * a)};
        if (std::abs(roots[1]) > std::abs(roots[0])) std::swap(roots[0], roots[1]);
        for (int root = 0; root < 2; ++root) {
          if (nodes) ++*nodes;
          const double X = roots[root];
          const double Y = kase == 1 ? co.R * X : co.R / X;
          if (!(X > 0 && Y > 0) || !std::isfinite(Y)) continue;

          TypeIIIBuildState nx = st;
          nx.closed_form_K = st.closed_form_K || closed_form;
          nx.choices.push_back({source, sign, kase, root + 1, K});
          const double bp = 2 * std::atan(1 / X), Bp = 2 * std::atan(1 / Y);
          nx.beta[j] = bp;
          nx.B[j] = Bp;
          nx.gamma[e] = partner(Bp, st.classes[j]);
          nx.Gamma[e] = partner(bp, st.classes[j]);
          nx.alpha[e] = pi - be - nx.gamma[e];
          nx.A[e] = pi - Be - nx.Gamma[e];
          if (!in_open_angle(nx.alpha[e]) || !in_open_angle(nx.A[e])) continue;
          nx.L[e] = le * std::sin(nx.alpha[e]) / std::sin(nx.gamma[e]);
          nx.L_lower[e] = me * std::sin(nx.A[e]) / std::sin(nx.Gamma[e]);
          if (!(rel(nx.L_lower[e], nx.L[e]) <= 1e-9)) continue;
          nx.l[j] = le * std::sin(be) / std::sin(nx.gamma[e]);
          nx.m[j] = me * std::sin(Be) / std::sin(nx.Gamma[e]);

          if (k < M - 1) {
            const double Lj = p.L_odd[k];
            nx.L[j] = nx.L_lower[j] = Lj;
            nx.l[j + 1] = std::sqrt(nx.l[j] * nx.l[j] + Lj * Lj - 2 * nx.l[j] * Lj * std::cos(bp));
            nx.m[j + 1] = std::sqrt(nx.m[j] * nx.m[j] + Lj * Lj - 2 * nx.m[j] * Lj * std::cos(Bp));
            try {
              nx.gamma[j] = face_angle(nx.l[j + 1], Lj, nx.l[j]);
              nx.Gamma[j] = face_angle(nx.m[j + 1], Lj, nx.m[j]);
            } catch (const Error&) {
              continue;
            }
            nx.alpha[j] = pi - bp - nx.gamma[j];
            nx.A[j] = pi - Bp - nx.Gamma[j];
            if (!in_open_angle(nx.alpha[j]) || !in_open_angle(nx.A[j])) continue;
            nx.beta[j + 1] = partner(nx.Gamma[j], st.classes[j + 1]);
            nx.B[j + 1] = partner(nx.gamma[j], st.classes[j + 1]);
          } else if (!close_final_stage(nx, j)) {
            continue;
          }
          nx.stage = k + 1;
          out.push_back(std::move(nx));
        }
      }
    }
  }
  return out;
}

double FoldBalance::max_abs() const {
  return std::max({std::abs(alpha_odd), std::abs(alpha_even), std::abs(A_odd), std::abs(A_even)});
}

namespace {

// sum_{k=a..b} x_{2k-1+shift} for 1-based k; empty when b < a.
double sum_every_other(const std::vector<double>& x, int a, int b, int shift) {
  double s = 0;
  for (int k = a; k <= b; ++k) s += x[2 * k - 2 + shift];
  return s;
}

std::pair<double, double> fan_balance(const std::vector<double>& x, int M, int fold_L) {
  const int kx = fold_L / 2;
  const double odd = sum_every_other(x, 1, kx, 0) - sum_every_other(x, kx + 1, M, 0);
  const double even = fold_L % 2 == 1 ? sum_every_other(x, 1, kx, 1) - sum_every_other(x, kx + 1, M, 1)
                                      : sum_every_other(x, 1, kx - 1, 1) - sum_every_other(x, kx, M, 1);
  return {odd, even};
}

}  // namespace

FoldBalance fold_residuals(const FaceAngles& f, int fold_L) {
  const int n = static_cast<int>(f.alpha.size()), M = n / 2;
  if (fold_L <= 2 || fold_L >= n - 2) throw Error(ErrorKind::InvalidParams, "fold_L must satisfy 2 < L < N-2");
  const auto [ao, ae] = fan_balance(f.alpha, M, fold_L);
  const auto [Ao, Ae] = fan_balance(f.A, M, fold_L);
  return {ao, ae, Ao, Ae};
}

FoldBalance circular_fold_residuals(const FaceAngles& f) {
  const int M = static_cast<int>(f.alpha.size()) / 2;
  return {sum_every_other(f.alpha, 1, M, 0) - pi, sum_every_other(f.alpha, 1, M, 1) - pi,
          sum_every_other(f.A, 1, M, 0) - pi, sum_every_other(f.A, 1, M, 1) - pi};
}

namespace {

FlatState examine_end(const ConstructedSuspension& s, double z, int fold_L) {
  FlatState f;
  f.z = z;
  Embedding e;
  try {
    e = embed(s.params, z, s.theta1, s.signs);
  } catch (const Error&) {
    return f;
  }
  f.exists = true;
  const auto pts = e.points();
  f.diameter = diameter(pts);
  f.coplanarity = coplanarity(pts);
  const auto delta = dihedrals(e).delta;
  const Variant v = s.type == SuspensionType::III_OAE ? Variant::OAE : Variant::OAS;
  f.mismatch = inf;
  for (auto kind : {FoldSpec::Kind::Open, FoldSpec::Kind::Compact}) {
    const auto spec = fold_spec(v, s.params.n, fold_L, kind);
    double worst = 0;
    for (int k = 0; k < s.params.n; ++k) worst = std::max(worst, circular_distance(delta[k], spec.delta[k]));
    if (worst < f.mismatch) {
      f.mismatch = worst;
      f.kind = kind;
    }
  }
  f.ok = f.coplanarity <= kCoplanarTol * f.diameter && f.mismatch <= kPatternTol;
  return f;
}

std::string describe(const char* name, const FlatState& f) {
  if (!f.exists) return std::string(name) + ": no configuration";
  return std::string(name) + ": z " + number(f.z, 12) + ", coplanarity/diameter " +
         number(f.coplanarity / f.diameter, 3) + ", nearest " + to_string(f.kind) + " pattern off by " +
         number(f.mismatch, 3);
}

}  // namespace

FlatCheck check_flat_states(const ConstructedSuspension& s) {
  if (!is_type_iii(s.type)) throw Error(ErrorKind::ClassificationUnavailable, "flat folds are defined for Type III");
  const int fold_L = s.fold_L.value_or(0);
  FlatCheck c;
  FlexionInterval iv;
  try {
    iv = flexion_interval(s.params, s.theta1, s.signs);
  } catch (const Error& e) {
    c.details = e.what();
    return c;
  }
  if (iv.lo_open) {
    c.lo.z = 0;
  } else {
    c.lo = examine_end(s, iv.z_lo, fold_L);
  }
  c.hi = examine_end(s, iv.z_hi, fold_L);
  c.ok = c.lo.ok && c.hi.ok && c.lo.kind != c.hi.kind && c.hi.z > c.lo.z;
  c.details = (iv.lo_open ? std::string("lower end: interval reaches z = 0") : describe("lower end", c.lo)) + "; " +
              describe("upper end", c.hi);
  return c;
}

std::vector<SignCandidate> rank_sign_patterns(const SuspensionParams& p) {
  const int n = p.n;
  const auto iv = flexion_interval(p);
  const auto zs = chebyshev_samples(iv, 33);
  std::vector<Embedding> base;
  std::vector<SignCandidate> out;
  for (int mask = 0; mask < (1 << (n - 2)); ++mask) {
    SignPattern s(n - 1, 1);
    for (int k = 1; k < n - 1; ++k)
      if (mask & (1 << (k - 1))) s[k] = -1;
    double worst = 0;
    int good = 0;
    for (double z : zs) {
      try {
        const auto e = embed(p, z, Theta1Rule::fixed(0.0), s);
        worst = std::max(worst, std::abs(closure_gap(e, p.L.back())) / p.L.back());
        ++good;
      } catch (const Error&) {
      }
    }
    out.push_back({s, good ? worst : inf});
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.gap < b.gap; });
  return out;
}

namespace {

std::string branch_record(const TypeIIIBuildState& st) {
  std::string r;
  for (std::size_t i = 0; i < st.choices.size(); ++i) {
    const auto& c = st.choices[i];
    if (i) r += " ";
    r += "k" + std::to_string(i + 1) + ":source" + std::to_string(c.source + 1) + (c.sign > 0 ? "+" : "-") +
         "case" + std::to_string(c.kase) + "root" + std::to_string(c.root);
  }
  return r;
}

class Search {
 public:
  Search(const TypeIIIParams& p, long budget) : p_(p), budget_(budget) {}

  bool exhausted() const { return nodes_ >= budget_; }
  long nodes() const { return nodes_; }
  const std::optional<ConstructedSuspension>& found() const { return found_; }
  BuildFailure failure(std::string reason) const {
    BuildFailure f{std::move(reason), best_, nodes_};
    return f;
  }

  void run(const TypeIIIBuildState& st) {
    if (found_ || exhausted()) return;
    for (auto& next : solve_stage(st, &nodes_)) {
      if (found_ || exhausted()) return;
      if (next.complete()) finish(next);
      else run(next);
    }
  }

 private:
  void record(std::vector<std::pair<std::string, double>> residuals) {
    double score = 0;
    for (const auto& r : residuals) score = std::max(score, std::isfinite(r.second) ? std::abs(r.second) : inf);
    if (best_.empty() || score < best_score_) {
      best_score_ = score;
      best_ = std::move(residuals);
    }
  }

  void finish(const TypeIIIBuildState& st) {
    ++nodes_;
    auto residuals = st.final_residuals;
    if (!(st.max_final_residual() <= kResidualTol)) {
      record(std::move(residuals));
      return;
    }
    ConstructedSuspension s;
    s.params = st.suspension_params();
    s.type = type_of(p_.variant);
    s.theta1 = Theta1Rule::fixed(0.0);
    if (p_.variant == Variant::OAE) s.fold_L = p_.fold_L;
    if (!validate_params(s.params).ok()) {
      residuals.emplace_back("triangle inequalities", inf);
      record(std::move(residuals));
      return;
    }
    std::vector<SignCandidate> signs;
    try {
      signs = rank_sign_patterns(s.params);
    } catch (const Error&) {
      residuals.emplace_back("closure gap", inf);
      record(std::move(residuals));
      return;
    }
    FlatCheck best_flat;
    bool have_flat = false;
    for (const auto& cand : signs) {
      if (!(cand.gap <= kGapTol)) break;
      s.signs = cand.signs;
      const auto fc = check_flat_states(s);
      if (fc.ok) {
        s.provenance["generator"] = "build_III";
        s.provenance["variant"] = to_string(p_.variant);
        s.provenance["seed"] = join({p_.l1, p_.m1, p_.l2, p_.m2});
        s.provenance["L_odd"] = join(p_.L_odd);
        s.provenance["eps_1"] = st.eps1 == Eps1::HalfPi ? "pi/2" : "3pi/2";
        s.provenance["branches"] = branch_record(st);
        s.provenance["closure_gap"] = number(cand.gap, 3);
        s.provenance["flat_states"] = fc.details;
        if (st.closed_form_K) s.provenance["K_source"] = "closed form (vertex figure infeasible)";
        found_ = std::move(s);
        return;
      }
      if (!have_flat) best_flat = fc, have_flat = true;
    }
    residuals.emplace_back("closure gap", signs.empty() ? inf : signs.front().gap);
    auto flat_entries = [&](const char* name, const FlatState& f) {
      residuals.emplace_back(std::string(name) + " coplanarity", f.exists ? f.coplanarity / f.diameter : inf);
      residuals.emplace_back(std::string(name) + " pattern", f.exists ? f.mismatch : inf);
    };
    if (have_flat) {
      flat_entries("flat state at z_lo", best_flat.lo);
      flat_entries("flat state at z_hi", best_flat.hi);
    }
    record(std::move(residuals));
  }

  TypeIIIParams p_;
  long budget_;
  long nodes_ = 0;
  std::optional<ConstructedSuspension> found_;
  std::vector<std::pair<std::string, double>> best_;
  double best_score_ = inf;
};

}  // namespace

BuildResult build_III(const TypeIIIParams& p, long search_budget) {
  validate(p);
  if (search_budget <= 0) return BuildFailure{"search budget is zero", {}, 0};
  Search search(p, search_budget);
  double first_z = nan;
  for (Eps1 e : {Eps1::HalfPi, Eps1::ThreeHalfPi}) {
    auto st = initial_state(p, e);
    // Both choices share cos eps_1, hence z; skip the repeat.
    if (std::abs(st.z - first_z) <= 1e-12 * st.z) continue;
    first_z = st.z;
    search.run(st);
    if (search.found()) return *search.found();
    if (search.exhausted()) break;
  }
  return search.failure(search.exhausted() ? "search budget exhausted" : "search space exhausted");
}

GridResult build_III_grid(Variant v, int M, const std::vector<double>& values, int fold_L, long budget_per_seed,
                          long total_budget) {
  if (values.empty()) throw Error(ErrorKind::InvalidParams, "empty seed grid");
  const int dims = 4 + (M - 1);
  const int q = static_cast<int>(values.size());
  GridResult g;
  double best_score = inf;
  std::vector<int> idx(dims, 0);
  while (true) {
    TypeIIIParams p;
    p.variant = v;
    p.M = M;
    p.fold_L = fold_L;
    p.l1 = values[idx[0]];
    p.m1 = values[idx[1]];
    p.l2 = values[idx[2]];
    p.m2 = values[idx[3]];
    for (int i = 4; i < dims; ++i) p.L_odd.push_back(values[idx[i]]);
    const long left = total_budget - g.nodes;
    if (left <= 0) break;
    ++g.seeds_tried;
    BuildResult r;
    try {
      r = build_III(p, std::min(budget_per_seed, left));
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::InvalidParams) throw;
      r = BuildFailure{e.what(), {}, 0};
    }
    if (auto* s = std::get_if<ConstructedSuspension>(&r)) {
      g.suspension = std::move(*s);
      g.params = p;
      return g;
    }
    auto& f = std::get<BuildFailure>(r);
    g.nodes += std::max(1L, f.nodes);
    double score = 0;
    for (const auto& x : f.residuals) score = std::max(score, std::isfinite(x.second) ? std::abs(x.second) : inf);
    if (!f.residuals.empty() && (g.best_failure.residuals.empty() || score < best_score)) {
      best_score = score;
      g.best_failure = f;
      g.params = p;
    }
    int d = dims - 1;
    while (d >= 0 && ++idx[d] == q) idx[d--] = 0;
    if (d < 0) break;
  }
  g.best_failure.nodes = g.nodes;
  if (g.best_failure.reason.empty()) g.best_failure.reason = "no seed in the grid produced a certified suspension";
  else g.best_failure.reason = "no seed in the grid produced a certified suspension (best: " + g.best_failure.reason + ")";
  return g;
}

}  // namespace flexsusp
