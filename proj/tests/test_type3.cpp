#include "flexsusp/analysis.hpp"
#include "flexsusp/io.hpp"
#include "flexsusp/type3.hpp"

#include <doctest.h>

#include <cmath>

using namespace flexsusp;

namespace {

const std::filesystem::path kData = FLEXSUSP_DATA_DIR;

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::InvalidParams;
}

FaceAngles uniform_angles(int n, double a) {
  FaceAngles f;
  for (auto* v : {&f.alpha, &f.beta, &f.gamma, &f.A, &f.B, &f.Gamma}) v->assign(n, a);
  return f;
}

TypeIIIParams seed(Variant v, std::vector<double> s, std::vector<double> L_odd, int fold_L = 0) {
  TypeIIIParams p;
  p.variant = v;
  p.M = static_cast<int>(L_odd.size()) + 1;
  p.l1 = s[0], p.m1 = s[1], p.l2 = s[2], p.m2 = s[3];
  p.L_odd = std::move(L_odd);
  p.fold_L = fold_L;
  return p;
}

}  // namespace

TEST_SUITE("type3") {
  TEST_CASE("half-angle helpers") {
    CHECK(cot_half(pi / 2) == doctest::Approx(1).epsilon(1e-15));
    CHECK(kind_of([] { cot_half(0); }) == ErrorKind::PoleAtZero);
    CHECK(kind_of([] { cot_half(2 * pi); }) == ErrorKind::PoleAtZero);
    CHECK(vp(pi / 2, pi / 2) == doctest::Approx(1).epsilon(1e-15));
    CHECK(vr(pi / 2, pi / 3) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-14));
    CHECK(kind_of([] { vp(pi, 1); }) == ErrorKind::PoleError);
    CHECK(kind_of([] { vr(1, 0); }) == ErrorKind::PoleError);
    CHECK(sr(pi, 0) == doctest::Approx(1).epsilon(1e-15));
    CHECK(sr(pi / 2, pi / 6) == doctest::Approx(1 / std::sqrt(3.0)).epsilon(1e-14));
    CHECK(cr(pi / 3, 0) == doctest::Approx(1).epsilon(1e-15));
    CHECK(kind_of([] { cr(pi / 2, pi / 2); }) == ErrorKind::PoleError);
    CHECK(kind_of([] { sr(1, -1); }) == ErrorKind::PoleError);
  }

  TEST_CASE("stage coefficients") {
    const double qA = 0.3, qB = 0.7, qC = -0.4;
    auto s = stage_coefficients(qA, qB, qC, 0, 1);
    CHECK(s.R == 1);
    CHECK(s.a == doctest::Approx(qC + qB));
    CHECK(s.b == doctest::Approx(-2 * qA));
    CHECK(s.c == doctest::Approx(-qB - qC));
    s = stage_coefficients(qA, qB, qC, 3, 2);
    CHECK(s.R == 2);
    CHECK(s.a == doctest::Approx(2 * qB - qC));
    CHECK(s.b == doctest::Approx(-4 * qA));
    CHECK(s.c == doctest::Approx(4 * qC - 2 * qB));
    CHECK(kind_of([] { stage_coefficients(1, 1, 1, -1, 1); }) == ErrorKind::SingularR);
    CHECK(kind_of([] { stage_coefficients(1, 1, 1, 1, 2); }) == ErrorKind::SingularR);
    CHECK(kind_of([] { stage_coefficients(1, 1, 1, 0, 3); }) == ErrorKind::InvalidParams);
  }

  TEST_CASE("eps_1 fixes the flexion value") {
    CHECK(eps1_flexion(1, 1, pi / 3, pi / 3, Eps1::HalfPi) == doctest::Approx(std::sqrt(1.5)).epsilon(1e-15));
    CHECK(eps1_flexion(1, 1, pi / 3, pi / 3, Eps1::ThreeHalfPi) ==
          doctest::Approx(eps1_flexion(1, 1, pi / 3, pi / 3, Eps1::HalfPi)).epsilon(1e-15));
    // The same z through the coordinate dihedral at that z.
    const double z = eps1_flexion(1.1, 0.9, 1.0, 1.2, Eps1::HalfPi);
    CHECK(dihedral_from_z(1.1, 0.9, 1.0, 1.2, z) == doctest::Approx(pi / 2).epsilon(1e-12));
  }

  TEST_CASE("fold balances") {
    auto f = uniform_angles(6, pi / 3);
    const auto b = fold_residuals(f, 3);
    CHECK(b.alpha_odd == doctest::Approx(-pi / 3));
    CHECK(b.alpha_even == doctest::Approx(-pi / 3));
    CHECK(b.A_odd == doctest::Approx(-pi / 3));
    CHECK(b.A_even == doctest::Approx(-pi / 3));
    for (int k = 0; k < 6; ++k) f.alpha[k] = 0.1 * (k + 1);
    const auto c = fold_residuals(f, 3);
    CHECK(c.alpha_odd == doctest::Approx(0.1 - 0.3 - 0.5));
    CHECK(c.alpha_even == doctest::Approx(0.2 - 0.4 - 0.6));

    auto g = uniform_angles(8, 0);
    for (int k = 0; k < 8; ++k) g.alpha[k] = 0.1 * (k + 1);
    const auto d = fold_residuals(g, 4);
    CHECK(d.alpha_odd == doctest::Approx(0.1 + 0.3 - 0.5 - 0.7));
    CHECK(d.alpha_even == doctest::Approx(0.2 - 0.4 - 0.6 - 0.8));
    const auto e = fold_residuals(g, 5);
    CHECK(e.alpha_odd == doctest::Approx(0.1 + 0.3 - 0.5 - 0.7));
    CHECK(e.alpha_even == doctest::Approx(0.2 + 0.4 - 0.6 - 0.8));

    const auto circ = circular_fold_residuals(uniform_angles(6, pi / 3));
    CHECK(circ.max_abs() <= 1e-15);
    CHECK(kind_of([&] { fold_residuals(f, 2); }) == ErrorKind::InvalidParams);
  }

  TEST_CASE("fold patterns and vertex classes") {
    const auto open = fold_spec(Variant::OAE, 8, 4, FoldSpec::Kind::Open);
    CHECK(open.delta == std::vector<double>{0, pi, pi, 0, pi, pi, pi, pi});
    const auto compact = fold_spec(Variant::OAE, 8, 4, FoldSpec::Kind::Compact);
    CHECK(compact.delta == std::vector<double>{pi, 0, 0, pi, 0, 0, 0, 0});
    CHECK(fold_spec(Variant::OAS, 6, 0, FoldSpec::Kind::Open).delta == std::vector<double>(6, pi));
    CHECK(fold_spec(Variant::OAS, 6, 0, FoldSpec::Kind::Compact).delta == std::vector<double>(6, 0));
    CHECK(kind_of([] { fold_spec(Variant::OAE, 6, 4, FoldSpec::Kind::Open); }) == ErrorKind::InvalidParams);

    const auto oae = vertex_classes(SuspensionType::III_OAE, 8, 3);
    for (int k = 0; k < 8; ++k)
      CHECK(oae[k] == (k == 0 || k == 2 ? VertexClass::OAS : VertexClass::OAE));
    for (auto c : vertex_classes(SuspensionType::III_OAS, 6, std::nullopt)) CHECK(c == VertexClass::OAE);
    CHECK(kind_of([] { vertex_classes(SuspensionType::III_OAE, 6, std::nullopt); }) ==
          ErrorKind::ClassificationUnavailable);
    CHECK(kind_of([] { vertex_classes(SuspensionType::II_AEE, 6, std::nullopt); }) ==
          ErrorKind::ClassificationUnavailable);
  }

  TEST_CASE("seed validation") {
    CHECK(kind_of([] { validate(seed(Variant::OAS, {1, 1, 1, 1}, {1})); }) == ErrorKind::InvalidParams);
    CHECK(kind_of([] { validate(seed(Variant::OAS, {1, -1, 1, 1}, {1, 1})); }) == ErrorKind::InvalidParams);
    CHECK(kind_of([] { validate(seed(Variant::OAE, {1, 1, 1, 1}, {1, 1}, 2)); }) == ErrorKind::InvalidParams);
    CHECK(kind_of([] { initial_state(seed(Variant::OAS, {1, 1, 3, 1}, {1, 1}), Eps1::HalfPi); }) ==
          ErrorKind::InvalidParams);
    CHECK(parse_variant("oas") == Variant::OAS);
    CHECK(type_of(Variant::OAE) == SuspensionType::III_OAE);
  }

  TEST_CASE("initial state partners follow the vertex class") {
    const auto st = initial_state(seed(Variant::OAS, {0.8, 0.8, 0.8, 1}, {0.8, 0.8}), Eps1::HalfPi);
    CHECK(st.beta[1] == st.Gamma[0]);
    CHECK(st.B[1] == st.gamma[0]);
    CHECK(std::abs(st.alpha[0] + st.beta[0] + st.gamma[0] - pi) <= 1e-15);
    CHECK(st.stage == 1);
    CHECK_FALSE(st.complete());
    CHECK(std::isnan(st.l[2]));
  }

  TEST_CASE("vertex-figure K agrees with the closed form") {
    const auto st = initial_state(seed(Variant::OAS, {0.8, 0.8, 0.8, 1}, {0.8, 0.8}), Eps1::HalfPi);
    const auto K = pair_invariant_K(st, 1);
    // At an OAE vertex V_P is tan(delta/2) tan(eps/2); the two mirror
    // placements give values whose magnitudes come from C_R and S_R.
    const double b = st.beta[0], B = st.B[0];
    const double c = std::abs(cr(B, b)), s = std::abs(sr(B, b));
    for (double k : K) {
      const double a = std::abs(k);
      CHECK(std::min(std::abs(a - c), std::abs(a - s)) <= 1e-9 * std::max(1.0, a));
    }
  }

  TEST_CASE("stage solutions keep the quadratic and the face angles") {
    const auto st = initial_state(seed(Variant::OAS, {0.8, 0.8, 0.8, 1}, {0.8, 0.8}), Eps1::HalfPi);
    long nodes = 0;
    const auto next = solve_stage(st, &nodes);
    CHECK(nodes > 0);
    REQUIRE_FALSE(next.empty());
    for (const auto& n : next) {
      CHECK(n.stage == 2);
      REQUIRE(n.choices.size() == 1);
      for (int k = 0; k < 3; ++k) {
        if (std::isnan(n.alpha[k]) || std::isnan(n.beta[k]) || std::isnan(n.gamma[k])) continue;
        CHECK(std::abs(n.alpha[k] + n.beta[k] + n.gamma[k] - pi) <= 1e-12);
        CHECK(n.beta[k] > 0);
        CHECK(n.beta[k] < pi);
      }
    }
  }

  TEST_CASE("build_III failure modes") {
    const auto zero = build_III(seed(Variant::OAS, {1, 1, 1, 1}, {1, 1}), 0);
    REQUIRE(std::holds_alternative<BuildFailure>(zero));
    CHECK(std::get<BuildFailure>(zero).reason == "search budget is zero");

    const auto eq = build_III(seed(Variant::OAS, {1, 1, 1, 1}, {1, 1}), 100000);
    REQUIRE(std::holds_alternative<BuildFailure>(eq));
    const auto& f = std::get<BuildFailure>(eq);
    CHECK_FALSE(f.residuals.empty());
    bool no_lower_flat = false;
    for (const auto& [name, value] : f.residuals)
      if (name.find("z_lo") != std::string::npos && std::isinf(value)) no_lower_flat = true;
    CHECK(no_lower_flat);
  }

  TEST_CASE("grid search yields a certified III-OAS") {
    const auto g = build_III_grid(Variant::OAS, 3, {0.8, 1.0, 1.25}, 0, 20000, 2000000);
    REQUIRE(g.suspension);
    const auto& s = *g.suspension;
    CHECK(s.type == SuspensionType::III_OAS);
    CHECK(g.seeds_tried >= 1);
    CHECK(s.provenance.at("generator") == "build_III");
    const auto fc = check_flat_states(s);
    CHECK(fc.ok);
    CHECK(fc.lo.kind != fc.hi.kind);
    const auto v = verify_flexible(s);
    CHECK(v.flexible);
    CHECK(v.eq3_max_deviation <= 1e-10);
  }

  TEST_CASE("bundled Type III documents satisfy the angle identities") {
    for (const char* name : {"iii_oas_example.json", "iii_oae_example.json"}) {
      CAPTURE(name);
      const auto s = read_suspension(kData / name);
      const auto v = verify_flexible(s);
      CHECK(v.flexible);
      CHECK(check_flat_states(s).ok);
      const auto t = dihedral_trace(s, 33, 0.9);
      const auto r = tetrahedral_angle_residuals(s, t);
      CHECK(r.max_branch() <= 1e-8);
      CHECK(r.max_pair() <= 1e-8);
      CHECK(r.max_reduction() <= 1e-8);
      CHECK(r.all_constant());
    }
  }

  TEST_CASE("sign ranking puts the certified pattern first") {
    const auto s = read_suspension(kData / "iii_oas_example.json");
    const auto ranked = rank_sign_patterns(s.params);
    CHECK(ranked.size() == 16);
    CHECK(ranked.front().gap <= 1e-8);
    for (std::size_t i = 1; i < ranked.size(); ++i) CHECK(ranked[i - 1].gap <= ranked[i].gap);
    for (const auto& c : ranked) CHECK(c.signs.front() == 1);
  }
}
