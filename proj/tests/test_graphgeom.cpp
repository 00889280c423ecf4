#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "graphflow/graphgeom.hpp"
#include "graphflow/verify.hpp"
#include "testutil.hpp"

using namespace graphflow;

TEST_CASE("zero jet: flat graph through the disk origin") {
  const ManifoldModel disk = parse_model("poincare-disk");
  const MapJet jet = MapJet::zero(2, 2);
  const MetricData md = metric_at(disk, jet.value);

  const Vec l2 = singular_values(jet, md);
  REQUIRE(l2[0] == 0.0);
  REQUIRE(l2[1] == 0.0);
  REQUIRE(min_s_eigenvalue(l2) == 1.0);
  REQUIRE(trace_s(l2) == 2.0);
  REQUIRE(projection_jacobian(l2) == 1.0);

  const Vec H = mean_curvature(jet, md);
  for (int d = 0; d < 4; ++d) REQUIRE(H[d] == 0.0);

  // s restricted to the normal bundle is -1 in every direction
  REQUIRE(s_perp_theta_max(jet, md, 0.0) == Catch::Approx(-1.0));

  const Frames fr = svd_frames(jet, md);
  REQUIRE(fr.rank == 0);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      Vec ti(4), tj(4), ni(4), nj(4);
      for (int d = 0; d < 4; ++d) {
        ti[d] = fr.tangent(d, i);
        tj[d] = fr.tangent(d, j);
        ni[d] = fr.normal(d, i);
        nj[d] = fr.normal(d, j);
      }
      REQUIRE(g_prod(md, 2, ti, tj) == Catch::Approx(i == j ? 1.0 : 0.0));
      REQUIRE(g_prod(md, 2, ni, nj) ==
              Catch::Approx(i == j ? 1.0 : 0.0).margin(1e-14));
      REQUIRE(g_prod(md, 2, ti, nj) == Catch::Approx(0.0).margin(1e-14));
    }
}

TEST_CASE("horizontal line in the upper half plane") {
  // f(x) = (x, d): the ansatz behind the translating example
  const ManifoldModel uhp = parse_model("upper-half-plane");
  const double d = 1.0;
  MapJet jet = MapJet::zero(1, 2);
  jet.value[0] = 0.7;
  jet.value[1] = d;
  jet.d1(0, 0) = 1.0;

  const MetricData md = metric_at(uhp, jet.value);
  const Vec V = mcf_velocity(jet, md);
  REQUIRE(V[0] == Catch::Approx(0.0).margin(1e-15));
  REQUIRE(V[1] == Catch::Approx(d / (1.0 + d * d)));

  const Vec H = mean_curvature(jet, md);
  REQUIRE(H[0] == Catch::Approx(0.0).margin(1e-14));
  REQUIRE(H[1] == Catch::Approx(0.0).margin(1e-14));
  REQUIRE(H[2] == Catch::Approx(0.5));
  REQUIRE(mean_curvature_norm2(jet, md) == Catch::Approx(0.25));
  REQUIRE(mean_curvature_norm2(jet, md) ==
          Catch::Approx(hs1_H_norm2(d)).epsilon(1e-14));
}

TEST_CASE("shrinking circle jet at r = 0.3") {
  const ManifoldModel disk = parse_model("poincare-disk");
  const double r = 0.3;
  MapJet jet = MapJet::zero(1, 2);
  jet.value[0] = 0.0;
  jet.value[1] = r;      // x = 0 on the circle (r sin x, r cos x)
  jet.d1(0, 0) = r;      // (r cos x, -r sin x)
  jet.d2(1, 0, 0) = -r;  // (-r sin x, -r cos x)

  const MetricData md = metric_at(disk, jet.value);
  const InducedMetric im = induced_metric(jet, md);
  REQUIRE(im.g(0, 0) == Catch::Approx(1.4347301050597754).epsilon(1e-13));
  const Mat s = s_tensor(jet, disk);
  REQUIRE(s(0, 0) == Catch::Approx(0.5652698949402246).epsilon(1e-13));

  const Vec V = mcf_velocity(jet, md);
  REQUIRE(V[0] == Catch::Approx(0.0).margin(1e-15));
  REQUIRE(V[1] == Catch::Approx(-0.2504587155963303).epsilon(1e-12));
  // target hessian B = g~ V points radially inward
  REQUIRE(im.g(0, 0) * V[1] ==
          Catch::Approx(-0.3593406593406593).epsilon(1e-12));

  REQUIRE(mean_curvature_norm2(jet, md) ==
          Catch::Approx(0.3030047975759616).epsilon(1e-12));
  REQUIRE(mean_curvature_norm2(jet, md) ==
          Catch::Approx(hs2_H_norm2(r)).epsilon(1e-13));
}

TEST_CASE("projection jacobian frozen values") {
  Vec both(2);
  both[0] = 1.0;
  both[1] = 1.0;
  REQUIRE(projection_jacobian(both) == Catch::Approx(0.5));
  Vec one(1);
  one[0] = 1.0 / 3.0;
  REQUIRE(projection_jacobian(one) ==
          Catch::Approx(0.8660254037844386).epsilon(1e-14));
}

TEST_CASE("frames diagonalize s on random contraction jets") {
  std::mt19937_64 rng(2024);
  for (const std::string spec :
       {"euclidean:2", "upper-half-plane", "poincare-disk",
        "product:euclidean:1,upper-half-plane"}) {
    const ManifoldModel model = parse_model(spec);
    for (int trial = 0; trial < 250; ++trial) {
      const int m = 1 + static_cast<int>(rng() % 2);
      const MapJet jet = criteria::random_contraction_jet(rng, model, m);
      const MetricData md = metric_at(model, jet.value);
      const int n = model.n;
      const Frames fr = svd_frames(jet, md);

      for (int i = 1; i < m; ++i) REQUIRE(fr.lambda2[i] >= fr.lambda2[i - 1]);
      REQUIRE(fr.lambda2[m - 1] <= 0.9 + 1e-12);

      auto tcol = [&](int i) {
        Vec v(m + n);
        for (int d = 0; d < m + n; ++d) v[d] = fr.tangent(d, i);
        return v;
      };
      auto ncol = [&](int k) {
        Vec v(m + n);
        for (int d = 0; d < m + n; ++d) v[d] = fr.normal(d, k);
        return v;
      };

      // orthonormality of the combined frame
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
          REQUIRE(g_prod(md, m, tcol(i), tcol(j)) ==
                  Catch::Approx(i == j ? 1.0 : 0.0).margin(1e-9));
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l)
          REQUIRE(g_prod(md, m, ncol(k), ncol(l)) ==
                  Catch::Approx(k == l ? 1.0 : 0.0).margin(1e-9));
      for (int i = 0; i < m; ++i)
        for (int k = 0; k < n; ++k)
          REQUIRE(g_prod(md, m, tcol(i), ncol(k)) ==
                  Catch::Approx(0.0).margin(1e-9));

      // s in the frame: diagonal blocks with the closed form entries,
      // mixed entries -2 lambda/(1+lambda^2) on the paired directions
      for (int i = 0; i < m; ++i) {
        const double li2 = fr.lambda2[i];
        REQUIRE(s_prod(md, m, tcol(i), tcol(i)) ==
                Catch::Approx((1.0 - li2) / (1.0 + li2)).margin(1e-9));
      }
      for (int k = 0; k < n; ++k) {
        const int i = k + m - n;  // paired tangent index, if any
        const double li2 = i >= 0 ? fr.lambda2[i] : 0.0;
        const double want = i >= 0 ? -(1.0 - li2) / (1.0 + li2) : -1.0;
        REQUIRE(s_prod(md, m, ncol(k), ncol(k)) ==
                Catch::Approx(want).margin(1e-9));
        for (int l = k + 1; l < n; ++l)
          REQUIRE(s_prod(md, m, ncol(k), ncol(l)) ==
                  Catch::Approx(0.0).margin(1e-9));
      }
      for (int i = 0; i < m; ++i)
        for (int k = 0; k < n; ++k) {
          const double li = std::sqrt(fr.lambda2[i]);
          const double want =
              (k == i + n - m) ? -2.0 * li / (1.0 + fr.lambda2[i]) : 0.0;
          REQUIRE(s_prod(md, m, tcol(i), ncol(k)) ==
                  Catch::Approx(want).margin(1e-9));
        }

      // determinant identity and the projection jacobian range
      const InducedMetric im = induced_metric(jet, md);
      double prod = 1.0;
      for (int i = 0; i < m; ++i) prod *= 1.0 + fr.lambda2[i];
      REQUIRE(im.det == Catch::Approx(prod).epsilon(1e-10));
      const double u = projection_jacobian(fr.lambda2);
      REQUIRE(u <= 1.0);
      REQUIRE(u > std::pow(2.0, -0.5 * m));
    }
  }
}

TEST_CASE("mean curvature is normal and matches the projected velocity") {
  std::mt19937_64 rng(77);
  for (const std::string spec : {"upper-half-plane", "poincare-disk"}) {
    const ManifoldModel model = parse_model(spec);
    for (int trial = 0; trial < 200; ++trial) {
      const int m = 1 + static_cast<int>(rng() % 2);
      const MapJet jet = criteria::random_contraction_jet(rng, model, m);
      const MetricData md = metric_at(model, jet.value);
      const Vec H = mean_curvature(jet, md);
      const double hn = std::sqrt(g_prod(md, m, H, H));

      const Vec V = mcf_velocity(jet, md);
      Vec w(m + model.n);
      for (int a = 0; a < model.n; ++a) w[m + a] = V[a];
      const Vec proj = pr_perp(jet, md, w);
      Vec diff(m + model.n);
      for (int d = 0; d < m + model.n; ++d) diff[d] = proj[d] - H[d];
      REQUIRE(std::sqrt(g_prod(md, m, diff, diff)) <=
              1e-10 * std::max(1.0, hn));

      // projection is idempotent
      const Vec proj2 = pr_perp(jet, md, proj);
      for (int d = 0; d < m + model.n; ++d) diff[d] = proj2[d] - proj[d];
      REQUIRE(std::sqrt(g_prod(md, m, diff, diff)) <=
              1e-10 * std::max(1.0, hn));

      for (int i = 0; i < m; ++i) {
        Vec t(m + model.n);
        t[i] = 1.0;
        for (int a = 0; a < model.n; ++a) t[m + a] = jet.d1(a, i);
        const double tn = std::sqrt(g_prod(md, m, t, t));
        REQUIRE(std::fabs(g_prod(md, m, H, t)) <=
                1e-10 * std::max(1.0, hn * tn));
      }

      // A is symmetric and normal-valued
      const Ten3 A = second_fundamental_form(jet, md);
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
          Vec aij(m + model.n);
          for (int d = 0; d < m + model.n; ++d) {
            REQUIRE(A(d, i, j) == A(d, j, i));
            aij[d] = A(d, i, j);
          }
          const double an = std::sqrt(g_prod(md, m, aij, aij));
          for (int k = 0; k < m; ++k) {
            Vec t(m + model.n);
            t[k] = 1.0;
            for (int a = 0; a < model.n; ++a) t[m + a] = jet.d1(a, k);
            REQUIRE(std::fabs(g_prod(md, m, aij, t)) <=
                    1e-9 * std::max(1.0, an));
          }
        }
    }
  }
}

TEST_CASE("theta bound on random jets with eps2 = 0") {
  std::mt19937_64 rng(31);
  const ManifoldModel disk = parse_model("poincare-disk");
  for (int trial = 0; trial < 200; ++trial) {
    const int m = 1 + static_cast<int>(rng() % 2);
    const MapJet jet = criteria::random_contraction_jet(rng, disk, m);
    const MetricData md = metric_at(disk, jet.value);
    const Frames fr = svd_frames(jet, md);
    const double lmax2 = fr.lambda2[m - 1];
    // with eps2 = 0 the matrix is s restricted to the normal bundle,
    // whose largest eigenvalue is -(1-lambda_max^2)/(1+lambda_max^2)
    REQUIRE(s_perp_theta_max(jet, md, 0.0) ==
            Catch::Approx(-(1.0 - lmax2) / (1.0 + lmax2)).margin(1e-9));
  }
}

TEST_CASE("saddle graph has curvature -1 at the origin") {
  testutil::QuadMap q;
  q.Q[0][0][1] = q.Q[0][1][0] = 1.0;  // f = (x1 x2, 0)
  const ManifoldModel flat = parse_model("euclidean:2");

  // centered differences of the Christoffels leave an O(h^2) residual
  const double h = 1e-3;
  auto jets = [&](int di, int dj) { return q.jet(di * h, dj * h); };
  REQUIRE(gauss_residual(jets, h, flat) <= 2e-6);

  auto g_at = [&](double u, double v) {
    const MapJet j = q.jet(u, v);
    Mat g = pullback_metric(j, metric_at(flat, j.value));
    for (int i = 0; i < 2; ++i) g(i, i) += 1.0;
    return g;
  };
  REQUIRE(intrinsic_rm1212_fd(g_at, 0.0, 0.0, 1e-4) ==
          Catch::Approx(-1.0).margin(1e-6));
  REQUIRE(testutil::quad_map_rm1212(q, 0.0, 0.0) == Catch::Approx(-1.0));
}

TEST_CASE("gauss identity holds exactly for quadratic graphs") {
  std::mt19937_64 rng(404);
  const ManifoldModel flat = parse_model("euclidean:2");
  double sum_h = 0.0, sum_h2 = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const testutil::QuadMap q = testutil::random_quad_map(rng);
    const double x0 = 0.1, y0 = -0.2;

    // analytic intrinsic side vs extrinsic side, no discretization
    const MapJet center = q.jet(x0, y0);
    const MetricData md = metric_at(flat, center.value);
    const Ten3 A = second_fundamental_form(center, md);
    Vec a11(4), a22(4), a12(4);
    for (int d = 0; d < 4; ++d) {
      a11[d] = A(d, 0, 0);
      a22[d] = A(d, 1, 1);
      a12[d] = A(d, 0, 1);
    }
    const double extrinsic =
        g_prod(md, 2, a11, a22) - g_prod(md, 2, a12, a12);
    const double intrinsic = testutil::quad_map_rm1212(q, x0, y0);
    REQUIRE(intrinsic ==
            Catch::Approx(extrinsic).margin(1e-12 * std::max(1.0, std::fabs(extrinsic))));

    // discretized intrinsic side converges at second order
    auto jets_at = [&](double h) {
      return [&, h](int di, int dj) { return q.jet(x0 + di * h, y0 + dj * h); };
    };
    const double r1 = gauss_residual(jets_at(1e-3), 1e-3, flat);
    const double r2 = gauss_residual(jets_at(5e-4), 5e-4, flat);
    REQUIRE(r1 <= 1e-5);
    sum_h += r1;
    sum_h2 += r2;
  }
  REQUIRE(std::log2(sum_h / sum_h2) >= 1.8);
}

TEST_CASE("degenerate rank jets still produce frames") {
  // m = 2 map collapsing one direction: f(x1, x2) = (x1/2, 0)
  const ManifoldModel flat = parse_model("euclidean:2");
  MapJet jet = MapJet::zero(2, 2);
  jet.d1(0, 0) = 0.5;
  const MetricData md = metric_at(flat, jet.value);
  const Frames fr = svd_frames(jet, md);
  REQUIRE(fr.rank == 1);
  REQUIRE(fr.lambda2[0] == Catch::Approx(0.0).margin(1e-15));
  REQUIRE(fr.lambda2[1] == Catch::Approx(0.25));
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      Vec ti(4), tj(4);
      for (int d = 0; d < 4; ++d) {
        ti[d] = fr.tangent(d, i);
        tj[d] = fr.tangent(d, j);
      }
      REQUIRE(g_prod(md, 2, ti, tj) ==
              Catch::Approx(i == j ? 1.0 : 0.0).margin(1e-12));
    }
}
