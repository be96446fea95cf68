#include "sae/kernels.hpp"

#include "test_support.hpp"

#include <doctest.h>
#include <omp.h>

#include <cmath>
#include <vector>

using namespace sae;
namespace k = sae::kernels;

namespace {

struct ThreadCount {
    explicit ThreadCount(int n) : saved_(omp_get_max_threads()) { omp_set_num_threads(n); }
    ~ThreadCount() { omp_set_num_threads(saved_); }
    int saved_;
};

// Shapes on both sides of the fork threshold, including ragged column blocks.
constexpr std::pair<std::size_t, std::size_t> kShapes[] = {{1, 1}, {7, 3}, {64, 65}, {300, 1024}, {600, 1024},
                                                           {260, 500}, {1, 20000}};

} // namespace

TEST_SUITE("kernels") {

TEST_CASE("sigmoid") {
    CHECK(k::sigmoid(0.0) == 0.5);
    CHECK(k::sigmoid(2.0) == doctest::Approx(1.0 / (1.0 + std::exp(-2.0))));
    CHECK(k::sigmoid(-2.0) == doctest::Approx(1.0 - k::sigmoid(2.0)));
    CHECK(k::sigmoid(1000.0) < 1.0);
    CHECK(k::sigmoid(-1000.0) > 0.0);
    CHECK(std::isfinite(std::log(k::sigmoid(-1e6))));
    CHECK(std::isfinite(std::log(1.0 - k::sigmoid(1e6))));
}

TEST_CASE("serial kernels against direct formulas") {
    // W = [[1, 2, 3], [4, 5, 6]]
    const std::vector<double> w{1, 2, 3, 4, 5, 6};
    const k::ConstMatrix wm{w.data(), 2, 3};
    const std::vector<double> x{1, 0, -1};
    std::vector<double> out2(2), out3(3);

    k::serial::matvec(wm, x, out2);
    CHECK(out2 == std::vector<double>{-2, -2});

    k::serial::affine_sigmoid(wm, x, std::vector<double>{2, 0}, out2);
    CHECK(out2[0] == 0.5);
    CHECK(out2[1] == k::sigmoid(-2.0));

    k::serial::affine_sigmoid_transposed(wm, std::vector<double>{1, -1}, std::vector<double>{3, 0, 0}, out3);
    CHECK(out3[0] == 0.5);
    CHECK(out3[1] == k::sigmoid(-3.0));
    CHECK(out3[2] == k::sigmoid(-3.0));

    const std::vector<double> data{0, 0, 3, 4, 1, 1};
    std::vector<double> d(3);
    k::serial::squared_distances({data.data(), 3, 2}, std::vector<double>{0, 0}, d);
    CHECK(d == std::vector<double>{0, 25, 2});

    // Batch of two; dW = sum_b dh_b x_b^T + h_b dy_b^T.
    const std::vector<double> dh{1, 2, 0, 1}, xs{1, 0, 1, 0, 1, 0}, h{0.5, 0.5, 1, 0}, dy{1, 1, 1, 0, 0, 2};
    std::vector<double> dw(6);
    k::serial::tied_weight_gradient({dh.data(), 2, 2}, {xs.data(), 2, 3}, {h.data(), 2, 2}, {dy.data(), 2, 3},
                                    {dw.data(), 2, 3});
    CHECK(dw == std::vector<double>{1.5, 0.5, 3.5, 2.5, 1.5, 2.5});
}

TEST_CASE("parallel kernels are bit-identical to serial") {
    Rng rng(99);
    for (int threads : {1, 2, 4, 7}) {
        ThreadCount guard(threads);
        for (auto [p, n] : kShapes) {
            CAPTURE(threads);
            CAPTURE(p);
            CAPTURE(n);
            const auto w = testing::random_vector(rng, p * n, -1, 1);
            const auto x = testing::random_vector(rng, n);
            const auto h = testing::random_vector(rng, p);
            const auto bp = testing::random_vector(rng, p, -1, 1);
            const auto bn = testing::random_vector(rng, n, -1, 1);
            const k::ConstMatrix wm{w.data(), p, n};

            std::vector<double> s(p), q(p);
            k::serial::affine_sigmoid(wm, x, bp, s);
            k::parallel::affine_sigmoid(wm, x, bp, q);
            CHECK(s == q);

            k::serial::matvec(wm, x, s);
            k::parallel::matvec(wm, x, q);
            CHECK(s == q);

            std::vector<double> sn(n), qn(n);
            k::serial::affine_sigmoid_transposed(wm, h, bn, sn);
            k::parallel::affine_sigmoid_transposed(wm, h, bn, qn);
            CHECK(sn == qn);

            // Rows of `w` reused as a database of p vectors.
            k::serial::squared_distances(wm, x, s);
            k::parallel::squared_distances(wm, x, q);
            CHECK(s == q);

            const std::size_t batch = 1 + rng.below(6);
            const auto dh = testing::random_vector(rng, batch * p, -1, 1);
            const auto xb = testing::random_vector(rng, batch * n);
            const auto hb = testing::random_vector(rng, batch * p);
            const auto dy = testing::random_vector(rng, batch * n, -1, 1);
            std::vector<double> dws(p * n), dwq(p * n, 7.0);
            const k::ConstMatrix dhm{dh.data(), batch, p}, xm{xb.data(), batch, n}, hm{hb.data(), batch, p},
                dym{dy.data(), batch, n};
            k::serial::tied_weight_gradient(dhm, xm, hm, dym, {dws.data(), p, n});
            k::parallel::tied_weight_gradient(dhm, xm, hm, dym, {dwq.data(), p, n});
            CHECK(dws == dwq);
        }
    }
}

} // TEST_SUITE
