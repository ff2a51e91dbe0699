#include <catch2/catch_amalgamated.hpp>

#include "oneshot/layout.hpp"
#include "oneshot/rng.hpp"

using namespace oneshot;

namespace {

ComplexMatrix random_hermitian(std::size_t d, Rng& rng) {
    ComplexMatrix m(d, d);
    for (std::size_t i = 0; i < d; ++i) {
        m(i, i) = rng.gaussian();
        for (std::size_t j = i + 1; j < d; ++j) {
            m(i, j) = rng.complex_gaussian();
            m(j, i) = std::conj(m(i, j));
        }
    }
    return m;
}

ComplexMatrix mes_projector(std::size_t d) {
    ComplexMatrix p(d * d, d * d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) p(i * d + i, j * d + j) = 1.0 / static_cast<double>(d);
    return p;
}

}  // namespace

TEST_CASE("layout basics") {
    SystemLayout lay({Factor{"A", 2}, Factor{"B", 3}, Factor{"C", 4}});
    REQUIRE(lay.total_dim() == 24);
    REQUIRE(lay.dim_of("B") == 3);
    REQUIRE(lay.strides() == std::vector<std::size_t>{12, 4, 1});
    REQUIRE_THROWS_AS(lay.index_of("Z"), std::out_of_range);
    REQUIRE_THROWS_AS(SystemLayout({Factor{"A", 2}, Factor{"A", 2}}), std::invalid_argument);
}

TEST_CASE("partial trace: MES marginal is maximally mixed") {
    SystemLayout lay({Factor{"A", 2}, Factor{"B", 2}});
    ComplexMatrix phi = mes_projector(2);
    ComplexMatrix marg = partial_trace(phi, lay, {"A"});
    REQUIRE((marg - ComplexMatrix::diag({0.5, 0.5})).frobenius_norm() < 1e-14);
}

TEST_CASE("partial trace: product-state marginal") {
    Rng rng(11);
    ComplexMatrix rho = random_hermitian(2, rng);
    ComplexMatrix sigma = random_hermitian(3, rng);
    // normalize traces to one so the marginal identity is exact
    rho = rho * rho.adjoint();
    sigma = sigma * sigma.adjoint();
    rho *= complexd(1.0 / rho.trace().real());
    sigma *= complexd(1.0 / sigma.trace().real());
    SystemLayout lay({Factor{"A", 2}, Factor{"B", 3}});
    ComplexMatrix joint = tensor(rho, sigma);
    REQUIRE((partial_trace(joint, lay, {"A"}) - rho).frobenius_norm() < 1e-12);
    REQUIRE((partial_trace(joint, lay, {"B"}) - sigma).frobenius_norm() < 1e-12);
}

TEST_CASE("partial trace: keeping everything is the identity") {
    SystemLayout lay({Factor{"A", 2}, Factor{"B", 2}});
    Rng rng(3);
    ComplexMatrix m = random_hermitian(4, rng);
    ComplexMatrix kept = partial_trace(m, lay, {"A", "B"});
    REQUIRE((kept - m).frobenius_norm() == 0.0);
}

TEST_CASE("partial trace preserves the trace") {
    SystemLayout lay({Factor{"A", 2}, Factor{"B", 3}, Factor{"C", 2}});
    Rng rng(5);
    ComplexMatrix m = random_hermitian(12, rng);
    for (auto keep : std::vector<std::vector<std::string>>{{"A"}, {"B"}, {"A", "C"}, {"B", "C"}}) {
        ComplexMatrix r = partial_trace(m, lay, keep);
        REQUIRE(std::abs(r.trace().real() - m.trace().real()) < 1e-12);
        REQUIRE(std::abs(r.trace().imag() - m.trace().imag()) < 1e-12);
    }
}

TEST_CASE("partial trace: kept factors follow layout order") {
    SystemLayout lay({Factor{"A", 2}, Factor{"B", 3}, Factor{"C", 2}});
    Rng rng(7);
    ComplexMatrix m = random_hermitian(12, rng);
    ComplexMatrix r1 = partial_trace(m, lay, {"A", "C"});
    ComplexMatrix r2 = partial_trace(m, lay, {"C", "A"});
    REQUIRE((r1 - r2).frobenius_norm() == 0.0);
    REQUIRE_THROWS_AS(partial_trace(m, lay, {"Z"}), std::out_of_range);
}

TEST_CASE("permutation round trip") {
    SystemLayout lay({Factor{"A", 2}, Factor{"B", 3}, Factor{"C", 2}});
    Rng rng(9);
    ComplexMatrix m = random_hermitian(12, rng);
    ComplexMatrix p = permute_operator(m, lay, {"C", "A", "B"});
    SystemLayout lay2({Factor{"C", 2}, Factor{"A", 2}, Factor{"B", 3}});
    ComplexMatrix back = permute_operator(p, lay2, {"A", "B", "C"});
    REQUIRE((back - m).frobenius_norm() == 0.0);
}

TEST_CASE("permutation is consistent with tensor structure") {
    Rng rng(13);
    ComplexMatrix a = random_hermitian(2, rng);
    ComplexMatrix b = random_hermitian(3, rng);
    SystemLayout lay({Factor{"A", 2}, Factor{"B", 3}});
    ComplexMatrix ab = tensor(a, b);
    ComplexMatrix ba = permute_operator(ab, lay, {"B", "A"});
    REQUIRE((ba - tensor(b, a)).frobenius_norm() < 1e-14);
}

TEST_CASE("apply_to_factors matches explicit embedding") {
    SystemLayout lay({Factor{"A", 2}, Factor{"B", 2}});
    std::vector<complexd> v = {0.5, 0.5, 0.5, 0.5};
    ComplexMatrix x{{0.0, 1.0}, {1.0, 0.0}};  // bit flip on B
    auto [out, out_lay] = apply_to_factors(v, lay, x, {"B"}, {Factor{"B", 2}});
    // result layout is (B, A); amplitudes all remain 1/2
    REQUIRE(out_lay.labels() == std::vector<std::string>{"B", "A"});
    for (auto z : out) REQUIRE(std::abs(z - complexd(0.5)) < 1e-15);

    std::vector<complexd> v01 = {0.0, 1.0, 0.0, 0.0};  // |0>_A |1>_B
    auto [out2, lay2] = apply_to_factors(v01, lay, x, {"B"}, {Factor{"B", 2}});
    // becomes |0>_B |0>_A in (B, A) order -> index 0
    REQUIRE(std::abs(out2[0] - complexd(1.0)) < 1e-15);
}

TEST_CASE("conjugate_on_factors embeds an isometry") {
    SystemLayout lay({Factor{"A", 2}, Factor{"B", 2}});
    Rng rng(17);
    ComplexMatrix rho = random_hermitian(4, rng);
    rho = rho * rho.adjoint();
    rho *= complexd(1.0 / rho.trace().real());
    // isometry embedding A (dim 2) into dim 3
    ComplexMatrix v(3, 2);
    v(0, 0) = 1.0;
    v(1, 1) = 1.0;
    auto [out, out_lay] = conjugate_on_factors(rho, lay, v, {"A"}, {Factor{"A", 3}});
    REQUIRE(out_lay.total_dim() == 6);
    REQUIRE(std::abs(out.trace().real() - 1.0) < 1e-12);
    // tracing the enlarged factor reproduces the B marginal
    ComplexMatrix mb = partial_trace(out, out_lay, {"B"});
    ComplexMatrix mb0 = partial_trace(rho, lay, {"B"});
    REQUIRE((mb - mb0).frobenius_norm() < 1e-12);
}
