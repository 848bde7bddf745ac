#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "doctest.h"
#include "qmem/counting.hpp"
#include "qmem/errors.hpp"
#include "support.hpp"

using namespace qmem;
using counting::ClickProbabilities;
using counting::DetectorParams;
using counting::MeasurementSetting;
using dualrail::TwoModeFockState;

namespace {

TwoModeFockState bell() {
    return dualrail::split_single_photon(dualrail::SingleModePhotonStats(0.0, 1.0, 0.0), 0.0);
}

// Each photon reaching detector k fires it with probability eta_k; a dark
// count fires it independently. Populations after the optics are detector
// photon numbers.
ClickProbabilities oracle(const TwoModeFockState& s, const MeasurementSetting& m, const DetectorParams& det) {
    const auto after = dualrail::apply_waveplate(dualrail::apply_phase(s, m.phase, dualrail::Rail::L), m.waveplate_angle);
    ClickProbabilities out{};
    for (const auto& o : dualrail::kBasis) {
        const double pop = after.population(o.left, o.right);
        const double silent1 = std::pow(1 - det.efficiency[0], o.left) * (1 - det.dark_count[0]);
        const double silent2 = std::pow(1 - det.efficiency[1], o.right) * (1 - det.dark_count[1]);
        out[0] += pop * silent1 * silent2;
        out[1] += pop * (1 - silent1) * silent2;
        out[2] += pop * silent1 * (1 - silent2);
        out[3] += pop * (1 - silent1) * (1 - silent2);
    }
    return out;
}

double max_diff(const ClickProbabilities& a, const ClickProbabilities& b) {
    double m = 0;
    for (int i = 0; i < 4; ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace

TEST_CASE("vacuum never clicks") {
    const auto p = counting::click_probabilities(TwoModeFockState::vacuum(), {}, {});
    CHECK(p[0] == doctest::Approx(1.0));
    CHECK(p[1] == 0.0);
    CHECK(p[2] == 0.0);
    CHECK(p[3] == 0.0);
}

TEST_CASE("single-photon fringe") {
    for (double phi = 0.0; phi < 2 * std::numbers::pi; phi += 0.3) {
        const auto p = counting::click_probabilities(bell(), {counting::kInterferenceAngle, phi}, {});
        CHECK(p[counting::kD1] == doctest::Approx((1 + std::cos(phi)) / 2).epsilon(1e-12));
        CHECK(p[counting::kD2] == doctest::Approx((1 - std::cos(phi)) / 2).epsilon(1e-12));
        CHECK(std::abs(p[counting::kBoth]) < 1e-15);
    }
}

TEST_CASE("click probabilities match the thinning oracle") {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> u(0.0, 1.0), a(-3.0, 3.0);
    for (int i = 0; i < 200; ++i) {
        const auto s = testsupport::random_state(rng);
        const MeasurementSetting m{a(rng), a(rng)};
        const DetectorParams det{{u(rng), u(rng)}, {0.1 * u(rng), 0.1 * u(rng)}};
        const auto p = counting::click_probabilities(s, m, det);
        CHECK(max_diff(p, oracle(s, m, det)) < 1e-12);
        CHECK(p[0] + p[1] + p[2] + p[3] == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("photon-statistics setting on <= 1 photon states") {
    std::mt19937_64 rng(42);
    for (int i = 0; i < 200; ++i) {
        const auto s = testsupport::random_single_photon_state(rng);
        const auto p = counting::click_probabilities(s, {}, {});
        CHECK(std::abs(p[counting::kNone] - s.population(0, 0)) < 1e-14);
        CHECK(std::abs(p[counting::kD1] - s.population(1, 0)) < 1e-14);
        CHECK(std::abs(p[counting::kD2] - s.population(0, 1)) < 1e-14);
        CHECK(std::abs(p[counting::kBoth]) < 1e-14);
    }
}

TEST_CASE("property: click probabilities are linear in the state") {
    std::mt19937_64 rng(43);
    std::uniform_real_distribution<double> u(0.0, 1.0), a(-3.0, 3.0);
    for (int i = 0; i < 200; ++i) {
        const auto s1 = testsupport::random_state(rng), s2 = testsupport::random_state(rng);
        const double w = u(rng);
        const TwoModeFockState mix(w * s1.matrix() + (1 - w) * s2.matrix());
        const MeasurementSetting m{a(rng), a(rng)};
        const DetectorParams det{{u(rng), u(rng)}, {0.05 * u(rng), 0.05 * u(rng)}};
        const auto p1 = counting::click_probabilities(s1, m, det), p2 = counting::click_probabilities(s2, m, det);
        const auto pm = counting::click_probabilities(mix, m, det);
        for (int k = 0; k < 4; ++k) CHECK(std::abs(pm[k] - (w * p1[k] + (1 - w) * p2[k])) < 1e-12);
    }
}

TEST_CASE("property: dark counts only add clicks") {
    std::mt19937_64 rng(44);
    std::uniform_real_distribution<double> u(0.0, 1.0), a(-3.0, 3.0);
    for (int i = 0; i < 200; ++i) {
        const auto s = testsupport::random_state(rng);
        const MeasurementSetting m{a(rng), a(rng)};
        DetectorParams det{{u(rng), u(rng)}, {0.0, 0.0}};
        const auto clean = counting::click_probabilities(s, m, det);
        det.dark_count = {0.2 * u(rng), 0.2 * u(rng)};
        const auto dark = counting::click_probabilities(s, m, det);
        CHECK(dark[counting::kNone] <= clean[counting::kNone] + 1e-15);
        CHECK(dark[counting::kBoth] >= clean[counting::kBoth] - 1e-15);
        CHECK(dark[counting::kD1] + dark[counting::kBoth] >= clean[counting::kD1] + clean[counting::kBoth] - 1e-15);
        CHECK(dark[counting::kD2] + dark[counting::kBoth] >= clean[counting::kD2] + clean[counting::kBoth] - 1e-15);
    }
}

TEST_CASE("detector validation") {
    CHECK_THROWS_AS(counting::click_probabilities(bell(), {}, DetectorParams{{1.2, 1.0}, {0, 0}}), ValidationError);
    CHECK_THROWS_AS(counting::click_probabilities(bell(), {}, DetectorParams{{1.0, 1.0}, {-0.1, 0}}), ValidationError);
}

TEST_CASE("sampling") {
    const auto all_none = counting::sample_trials({1, 0, 0, 0}, 100, 7);
    CHECK(all_none.n_trials == 100);
    CHECK(all_none[counting::kNone] == 100);

    const auto half = counting::sample_trials({0.5, 0.5, 0, 0}, 1000000, 8);
    CHECK(std::abs(static_cast<double>(half[counting::kD1]) / 1e6 - 0.5) < 1.5e-3);
    CHECK(half[counting::kD2] == 0);
    CHECK(half[counting::kBoth] == 0);

    const ClickProbabilities p{0.7, 0.14, 0.15, 0.01};
    const auto a = counting::sample_trials(p, 50000, 9), b = counting::sample_trials(p, 50000, 9);
    CHECK(a.counts == b.counts);
    const auto c = counting::sample_trials(p, 50000, 10);
    CHECK(a.counts != c.counts);
    CHECK(a.counts[0] + a.counts[1] + a.counts[2] + a.counts[3] == 50000);

    const auto empty = counting::sample_trials(p, 0, 9);
    CHECK(empty.n_trials == 0);

    CHECK_THROWS_AS(counting::sample_trials({0.5, 0.4, 0, 0}, 10, 1), ValidationError);
    CHECK_THROWS_AS(counting::sample_trials({1.2, -0.2, 0, 0}, 10, 1), ValidationError);
}

TEST_CASE("property: sampled frequencies are unbiased") {
    // Each pattern count is binomial; the z-scores over many seeds should have
    // mean ~0 and variance ~1.
    const ClickProbabilities p{0.6, 0.25, 0.1, 0.05};
    const std::uint64_t n = 2000;
    double sum = 0, sum2 = 0;
    const int reps = 400;
    for (int r = 0; r < reps; ++r) {
        const auto t = counting::sample_trials(p, n, counting::derive_seed(99, r));
        const double z = (t[counting::kD2] - n * p[2]) / std::sqrt(n * p[2] * (1 - p[2]));
        sum += z;
        sum2 += z * z;
    }
    const double mean = sum / reps, var = sum2 / reps - mean * mean;
    CHECK(std::abs(mean) < 4.0 / std::sqrt(reps));
    CHECK(var == doctest::Approx(1.0).epsilon(0.25));
}

TEST_CASE("derived seeds are distinct and stable") {
    std::set<std::uint64_t> seen;
    for (std::uint64_t k = 0; k < 1000; ++k) seen.insert(counting::derive_seed(5, k));
    CHECK(seen.size() == 1000);
    CHECK(counting::derive_seed(5, 3) == counting::derive_seed(5, 3));
    CHECK(counting::derive_seed(5, 3) != counting::derive_seed(6, 3));
}

TEST_CASE("fringe scan") {
    const auto phases = counting::fringe_phases(12);
    REQUIRE(phases.size() == 12);
    CHECK(phases[0] == 0.0);
    CHECK(phases[3] == doctest::Approx(std::numbers::pi / 2));

    const DetectorParams det{{0.5, 0.5}, {0, 0}};
    const auto scan = counting::fringe_scan(bell(), phases, det, 1000, 77);
    REQUIRE(scan.size() == 12);
    for (std::size_t k = 0; k < scan.size(); ++k) {
        const auto probs =
            counting::click_probabilities(bell(), {counting::kInterferenceAngle, phases[k]}, det);
        const auto expected = counting::sample_trials(probs, 1000, counting::derive_seed(77, k));
        CHECK(scan[k].counts.counts == expected.counts);
        CHECK(scan[k].phase == phases[k]);
    }
    // Ideal detectors on an ideal Bell state: the fringe goes fully dark.
    const auto ideal = counting::fringe_scan(bell(), std::vector<double>{std::numbers::pi}, {}, 1000, 1);
    CHECK(ideal[0].counts[counting::kD1] == 0);
    CHECK(ideal[0].counts[counting::kD2] == 1000);
}
