#pragma once

#include <concepts>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace lsnw {

/// Anything that hands out standard normal draws. Test code plugs in stubs.
template <class G>
concept NormalSource = requires(G& g) {
    { g.normal() } -> std::convertible_to<double>;
};

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seeded generator. Independent substreams are derived by hashing the root
/// seed with a path of integer tags (e.g. {T, run, replication}), so every
/// task owns its stream no matter which thread runs it.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

    static Rng stream(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
        std::uint64_t h = splitmix64(seed);
        for (std::uint64_t tag : path) {
            h = splitmix64(h ^ splitmix64(tag + 0x632be59bd9b4e019ULL));
        }
        return Rng(h);
    }

    double normal() { return normal_(engine_); }
    double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
    std::uint64_t bits() { return engine_(); }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

static_assert(NormalSource<Rng>);

} // namespace lsnw
