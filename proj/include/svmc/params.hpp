#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace svmc {

struct ParamBlock {
    std::string name;
    std::size_t offset = 0;
    std::size_t size = 0;

    bool operator==(const ParamBlock&) const = default;
};

/// Ordered named blocks over one flat vector.
class ParamLayout {
  public:
    static constexpr int kVersion = 1;

    std::size_t add(const std::string& name, std::size_t size);
    const ParamBlock& block(const std::string& name) const;
    const std::vector<ParamBlock>& blocks() const noexcept { return blocks_; }
    std::size_t total() const noexcept { return total_; }

    bool operator==(const ParamLayout&) const = default;

  private:
    std::vector<ParamBlock> blocks_;
    std::size_t total_ = 0;
};

/// Flat parameter vector plus its layout. Positivity-constrained entries
/// (Jastrow betas, envelope rates) are stored unconstrained and passed
/// through softplus where they are used.
class ParamStore {
  public:
    ParamStore() = default;
    explicit ParamStore(ParamLayout layout) : layout_(std::move(layout)), values_(layout_.total(), 0.0) {}

    const ParamLayout& layout() const noexcept { return layout_; }
    std::span<const double> values() const noexcept { return values_; }
    std::span<double> values() noexcept { return values_; }
    std::size_t size() const noexcept { return values_.size(); }

    std::span<double> block(const std::string& name);
    std::span<const double> block(const std::string& name) const;

    /// Text dump: header with layout version, one line per block, values as
    /// hexfloats. read() restores it bit for bit.
    void write(std::ostream& out) const;
    static ParamStore read(std::istream& in);

    bool operator==(const ParamStore&) const = default;

  private:
    ParamLayout layout_;
    std::vector<double> values_;
};

std::string hexfloat(double v);
/// Parses a number written by hexfloat (or any strtod-readable form).
double parse_hexfloat(const std::string& token);

}  // namespace svmc
