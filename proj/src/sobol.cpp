#include "metacost/sobol.hpp"

#include <array>
#include <bit>

#include "metacost/error.hpp"

namespace metacost {

namespace {

constexpr int kBits = 32;

// Joe-Kuo new-6 primitive polynomials and initial direction numbers for
// dimensions 1..23; dimension 0 is the van der Corput radical inverse.
struct DirInit {
    int s;                     // polynomial degree
    std::uint32_t a;           // interior coefficient bits
    std::array<std::uint32_t, 7> m; // m_1..m_s, odd
};

constexpr DirInit kDir[] = {
    {1, 0, {1}},
    {2, 1, {1, 3}},
    {3, 1, {1, 3, 1}},
    {3, 2, {1, 1, 1}},
    {4, 1, {1, 1, 3, 3}},
    {4, 4, {1, 3, 5, 13}},
    {5, 2, {1, 1, 5, 5, 17}},
    {5, 4, {1, 1, 5, 5, 5}},
    {5, 7, {1, 1, 7, 11, 19}},
    {5, 11, {1, 1, 5, 1, 1}},
    {5, 13, {1, 1, 1, 3, 11}},
    {5, 14, {1, 3, 5, 5, 31}},
    {6, 1, {1, 3, 3, 9, 7, 49}},
    {6, 13, {1, 1, 1, 15, 21, 21}},
    {6, 16, {1, 3, 1, 13, 27, 49}},
    {6, 19, {1, 1, 1, 15, 7, 5}},
    {6, 22, {1, 3, 1, 15, 13, 25}},
    {6, 25, {1, 1, 5, 5, 19, 61}},
    {7, 1, {1, 3, 7, 11, 23, 15, 103}},
    {7, 4, {1, 3, 7, 13, 13, 15, 69}},
    {7, 7, {1, 1, 3, 13, 7, 35, 63}},
    {7, 8, {1, 3, 5, 9, 1, 25, 53}},
    {7, 14, {1, 3, 1, 13, 9, 35, 107}},
};

std::vector<std::uint32_t> direction_numbers(std::size_t d) {
    std::vector<std::uint32_t> v(kBits);
    if (d == 0) {
        for (int b = 0; b < kBits; ++b)
            v[b] = 1u << (kBits - 1 - b);
        return v;
    }
    const DirInit& di = kDir[d - 1];
    const int s = di.s;
    for (int b = 0; b < s && b < kBits; ++b)
        v[b] = di.m[b] << (kBits - 1 - b);
    for (int b = s; b < kBits; ++b) {
        std::uint32_t x = v[b - s] ^ (v[b - s] >> s);
        for (int k = 1; k < s; ++k)
            if ((di.a >> (s - 1 - k)) & 1u) x ^= v[b - k];
        v[b] = x;
    }
    return v;
}

} // namespace

SobolSequence::SobolSequence(std::size_t dim, std::uint64_t skip) {
    if (dim == 0 || dim > max_dim)
        throw validation_error("sobol dimension must be in [1, 24]");
    v_.reserve(dim);
    for (std::size_t d = 0; d < dim; ++d) v_.push_back(direction_numbers(d));
    x_.assign(dim, 0u);
    seek(skip);
}

void SobolSequence::seek(std::uint64_t index) {
    // Gray-code state reconstructed directly: x = XOR of V[b] over set
    // bits b of gray(index).
    std::uint64_t gray = index ^ (index >> 1);
    x_.assign(v_.size(), 0u);
    for (int b = 0; gray != 0; ++b, gray >>= 1)
        if (gray & 1u)
            for (std::size_t d = 0; d < v_.size(); ++d) x_[d] ^= v_[d][b];
    index_ = index;
}

std::vector<double> SobolSequence::next() {
    constexpr double scale = 1.0 / 4294967296.0; // 2^-32
    std::vector<double> p(v_.size());
    for (std::size_t d = 0; d < v_.size(); ++d) p[d] = x_[d] * scale;
    // Advance: flip the direction number of the lowest zero bit of index.
    const int b = std::countr_one(index_);
    if (b < kBits)
        for (std::size_t d = 0; d < v_.size(); ++d) x_[d] ^= v_[d][b];
    ++index_;
    return p;
}

std::vector<std::vector<double>> SobolSequence::take(std::size_t n) {
    std::vector<std::vector<double>> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(next());
    return out;
}

std::vector<std::vector<double>> sobol_points(std::size_t dim, std::size_t n,
                                              std::uint64_t skip) {
    return SobolSequence(dim, skip).take(n);
}

} // namespace metacost
