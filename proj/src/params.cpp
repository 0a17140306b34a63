#include "svmc/params.hpp"

#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace svmc {

std::size_t ParamLayout::add(const std::string& name, std::size_t size) {
    for (const auto& b : blocks_)
        if (b.name == name) throw std::invalid_argument("ParamLayout: duplicate block '" + name + "'");
    blocks_.push_back({name, total_, size});
    total_ += size;
    return blocks_.back().offset;
}

const ParamBlock& ParamLayout::block(const std::string& name) const {
    for (const auto& b : blocks_)
        if (b.name == name) return b;
    throw std::out_of_range("ParamLayout: no block named '" + name + "'");
}

std::span<double> ParamStore::block(const std::string& name) {
    const auto& b = layout_.block(name);
    return std::span<double>(values_).subspan(b.offset, b.size);
}

std::span<const double> ParamStore::block(const std::string& name) const {
    const auto& b = layout_.block(name);
    return std::span<const double>(values_).subspan(b.offset, b.size);
}

std::string hexfloat(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%a", v);
    return buf;
}

double parse_hexfloat(const std::string& token) {
    char* end = nullptr;
    const double v = std::strtod(token.c_str(), &end);
    if (end == token.c_str() || *end != '\0') throw std::runtime_error("malformed number '" + token + "'");
    return v;
}

void ParamStore::write(std::ostream& out) const {
    out << "svmc-params " << ParamLayout::kVersion << ' ' << layout_.blocks().size() << ' ' << values_.size() << '\n';
    for (const auto& b : layout_.blocks()) {
        out << b.name << ' ' << b.size;
        for (std::size_t k = 0; k < b.size; ++k) out << ' ' << hexfloat(values_[b.offset + k]);
        out << '\n';
    }
}

ParamStore ParamStore::read(std::istream& in) {
    std::string magic;
    int version = 0;
    std::size_t n_blocks = 0, n_values = 0;
    if (!(in >> magic >> version >> n_blocks >> n_values) || magic != "svmc-params")
        throw std::runtime_error("parameter dump: bad header");
    if (version != ParamLayout::kVersion)
        throw std::runtime_error("parameter dump: unsupported layout version " + std::to_string(version));
    ParamLayout layout;
    std::vector<double> values;
    values.reserve(n_values);
    for (std::size_t bi = 0; bi < n_blocks; ++bi) {
        std::string name;
        std::size_t size = 0;
        if (!(in >> name >> size)) throw std::runtime_error("parameter dump: truncated block header");
        layout.add(name, size);
        for (std::size_t k = 0; k < size; ++k) {
            std::string tok;
            if (!(in >> tok)) throw std::runtime_error("parameter dump: truncated block '" + name + "'");
            values.push_back(parse_hexfloat(tok));
        }
    }
    if (values.size() != n_values) throw std::runtime_error("parameter dump: value count mismatch");
    ParamStore store(std::move(layout));
    std::copy(values.begin(), values.end(), store.values_.begin());
    return store;
}

}  // namespace svmc
