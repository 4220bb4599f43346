#include "spinfer/rng.hpp"

#include <cmath>

namespace spinfer {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

}  // namespace

Rng Rng::split(std::uint64_t stream) const {
    // child keyed off the construction seed, so the stream a given id yields
    // does not depend on how far the parent has advanced
    return Rng(mix64(seed_ ^ mix64(kGolden * (stream + 1))));
}

std::uint64_t Rng::next_u64() {
    state_ += kGolden;
    return mix64(state_);
}

double Rng::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u1 = 1.0 - uniform();  // (0, 1]
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
}

int Rng::rademacher() {
    return (next_u64() >> 63) ? 1 : -1;
}

int Rng::uniform_int(int n) {
    // rejection-free modulo bias is ~2^-64 * n, irrelevant at our n; keep simple
    return static_cast<int>(next_u64() % static_cast<std::uint64_t>(n));
}

std::vector<int> Rng::rademacher_vector(int n) {
    std::vector<int> v(n);
    for (int i = 0; i < n; ++i) v[i] = rademacher();
    return v;
}

}  // namespace spinfer
