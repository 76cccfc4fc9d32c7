#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "glc/kernels.hpp"
#include "glc/rng.hpp"

using namespace glc;
namespace k = glc::kernels;

namespace {

std::vector<double> random_vec(Rng& rng, std::size_t n, double lo = -2.0, double hi = 2.0) {
    std::vector<double> v(n);
    for (double& x : v) x = rng.uniform(lo, hi);
    return v;
}

}  // namespace

#if GLC_KERNELS_HAVE_AVX2

TEST_CASE("avx2 elementwise kernels match scalar bitwise") {
    if (!k::avx2_supported()) return;
    Rng rng(11);
    for (std::size_t n : {0u, 1u, 3u, 4u, 7u, 8u, 33u, 257u}) {
        const auto a = random_vec(rng, n);
        const auto b = random_vec(rng, n);

        std::vector<double> out_s(n), out_v(n);
        k::scalar::abs_diff(a.data(), b.data(), out_s.data(), n);
        k::avx2::abs_diff(a.data(), b.data(), out_v.data(), n);
        CHECK(out_s == out_v);

        k::scalar::hadamard(a.data(), b.data(), out_s.data(), n);
        k::avx2::hadamard(a.data(), b.data(), out_v.data(), n);
        CHECK(out_s == out_v);

        auto y_s = b, y_v = b;
        k::scalar::axpy(1.37, a.data(), y_s.data(), n);
        k::avx2::axpy(1.37, a.data(), y_v.data(), n);
        CHECK(y_s == y_v);

        auto x_s = a, x_v = a;
        k::scalar::scal(-0.81, x_s.data(), n);
        k::avx2::scal(-0.81, x_v.data(), n);
        CHECK(x_s == x_v);

        auto r_s = a, r_v = a;
        k::scalar::relu(r_s.data(), n);
        k::avx2::relu(r_v.data(), n);
        CHECK(r_s == r_v);

        auto g_s = b, g_v = b;
        k::scalar::relu_backward(a.data(), g_s.data(), n);
        k::avx2::relu_backward(a.data(), g_v.data(), n);
        CHECK(g_s == g_v);
    }
}

TEST_CASE("avx2 reductions match scalar to a few ulps") {
    if (!k::avx2_supported()) return;
    Rng rng(12);
    for (std::size_t n : {1u, 5u, 16u, 127u, 1024u}) {
        const auto a = random_vec(rng, n);
        const auto b = random_vec(rng, n);
        const double ds = k::scalar::dot(a.data(), b.data(), n);
        const double dv = k::avx2::dot(a.data(), b.data(), n);
        CHECK(std::abs(ds - dv) <= 1e-12 * (1.0 + std::abs(ds)));
        const double ss = k::scalar::sum(a.data(), n);
        const double sv = k::avx2::sum(a.data(), n);
        CHECK(std::abs(ss - sv) <= 1e-12 * (1.0 + std::abs(ss)));
    }
}

TEST_CASE("isa selection switches the dispatch table") {
    if (!k::avx2_supported()) return;
    REQUIRE(k::select_isa(k::Isa::avx2));
    CHECK(k::active_isa() == k::Isa::avx2);
    REQUIRE(k::select_isa(k::Isa::scalar));
    CHECK(k::active_isa() == k::Isa::scalar);
    k::reset_isa();
    CHECK(k::active_isa() == k::Isa::avx2);  // auto-detect picks avx2 here
}

#endif  // GLC_KERNELS_HAVE_AVX2

TEST_CASE("matmul variants match a naive triple loop") {
    Rng rng(13);
    const std::size_t m = 5, kk = 7, n = 6;
    const auto a = random_vec(rng, m * kk);
    const auto b = random_vec(rng, kk * n);
    std::vector<double> c(m * n);
    k::matmul_nn(a.data(), b.data(), c.data(), m, kk, n);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double want = 0.0;
            for (std::size_t l = 0; l < kk; ++l) want += a[i * kk + l] * b[l * n + j];
            CHECK(c[i * n + j] == doctest::Approx(want).epsilon(1e-12));
        }

    // C = A^T B with A stored K x M
    const auto at = random_vec(rng, kk * m);
    k::matmul_tn(at.data(), b.data(), c.data(), m, kk, n);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double want = 0.0;
            for (std::size_t l = 0; l < kk; ++l) want += at[l * m + i] * b[l * n + j];
            CHECK(c[i * n + j] == doctest::Approx(want).epsilon(1e-12));
        }

    // C = A B^T with B stored N x K
    const auto bt = random_vec(rng, n * kk);
    k::matmul_nt(a.data(), bt.data(), c.data(), m, kk, n);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double want = 0.0;
            for (std::size_t l = 0; l < kk; ++l) want += a[i * kk + l] * bt[j * kk + l];
            CHECK(c[i * n + j] == doctest::Approx(want).epsilon(1e-12));
        }
}

TEST_CASE("csr products match dense equivalents") {
    // S = [[0, .5, .5], [1, 0, 0], [0, 0, 1]]
    const std::vector<int> offsets{0, 2, 3, 4};
    const std::vector<int> cols{1, 2, 0, 2};
    const std::vector<double> vals{0.5, 0.5, 1.0, 1.0};
    const double dense[9] = {0, 0.5, 0.5, 1, 0, 0, 0, 0, 1};

    Rng rng(14);
    const std::size_t d = 4;
    const auto x = random_vec(rng, 3 * d);

    std::vector<double> got(3 * d);
    k::csr_matmul(offsets.data(), cols.data(), vals.data(), 3, x.data(), d, got.data());
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t t = 0; t < d; ++t) {
            double want = 0.0;
            for (std::size_t j = 0; j < 3; ++j) want += dense[i * 3 + j] * x[j * d + t];
            CHECK(got[i * d + t] == doctest::Approx(want).epsilon(1e-12));
        }

    std::vector<double> got_t(3 * d, 0.0);
    k::csr_t_matmul_acc(offsets.data(), cols.data(), vals.data(), 3, x.data(), d, got_t.data());
    for (std::size_t j = 0; j < 3; ++j)
        for (std::size_t t = 0; t < d; ++t) {
            double want = 0.0;
            for (std::size_t i = 0; i < 3; ++i) want += dense[i * 3 + j] * x[i * d + t];
            CHECK(got_t[j * d + t] == doctest::Approx(want).epsilon(1e-12));
        }
}
