#pragma once
#include <cstddef>
#include <cstdint>
#include <vector>

namespace metacost {

// Gray-code Sobol sequence over [0,1)^dim with 32-bit precision, built on
// the Joe-Kuo "new-6" direction numbers. Point 0 is the origin. Supports
// up to 24 dimensions, enough for the widest model (LICH05, 10 params)
// under Saltelli 2d cross-sampling.
class SobolSequence {
public:
    static constexpr std::size_t max_dim = 24;

    explicit SobolSequence(std::size_t dim, std::uint64_t skip = 0);

    std::size_t dim() const { return v_.size(); }
    std::uint64_t index() const { return index_; }

    // The point with the current index; advances by one.
    std::vector<double> next();

    // Jump so the next point returned has this index.
    void seek(std::uint64_t index);

    // n points as rows, starting at the current index.
    std::vector<std::vector<double>> take(std::size_t n);

private:
    std::vector<std::vector<std::uint32_t>> v_; // [dim][32] direction numbers
    std::vector<std::uint32_t> x_;              // Gray-code state
    std::uint64_t index_ = 0;
};

std::vector<std::vector<double>> sobol_points(std::size_t dim, std::size_t n,
                                              std::uint64_t skip = 0);

} // namespace metacost
