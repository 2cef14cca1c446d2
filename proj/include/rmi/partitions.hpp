#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <type_traits>
#include <unordered_map>
#include <vector>

#include "rmi/errors.hpp"

namespace rmi {

/// Dense group assignment of n objects. Group indices are assigned in
/// order of first appearance, so every index in [0, groups()) is used.
struct Labeling {
    std::vector<std::uint32_t> assignments;
    std::vector<std::uint64_t> group_sizes;
    std::vector<std::string> original_labels;

    std::size_t size() const noexcept { return assignments.size(); }
    std::size_t groups() const noexcept { return group_sizes.size(); }
};

/// Builds a labeling from arbitrary hashable labels. Labels are converted
/// to strings for `original_labels` through operator<<.
template <class Label>
Labeling make_labeling(std::span<const Label> labels)
{
    if (labels.empty())
        throw DataError("labeling is empty: at least one object is required");

    Labeling out;
    out.assignments.reserve(labels.size());
    std::unordered_map<Label, std::uint32_t> index;
    for (const auto& label : labels) {
        auto [it, inserted] = index.try_emplace(label, static_cast<std::uint32_t>(out.group_sizes.size()));
        if (inserted) {
            out.group_sizes.push_back(0);
            if constexpr (std::is_convertible_v<const Label&, std::string>) {
                out.original_labels.emplace_back(label);
            } else {
                std::ostringstream os;
                os << label;
                out.original_labels.push_back(os.str());
            }
        }
        out.assignments.push_back(it->second);
        ++out.group_sizes[it->second];
    }
    return out;
}

template <class Label>
Labeling make_labeling(const std::vector<Label>& labels)
{
    return make_labeling(std::span<const Label>(labels));
}

/// Parses the line-oriented label format: one token per line, surrounding
/// whitespace trimmed, blank lines and lines starting with '#' skipped.
inline Labeling parse_labeling(std::istream& in, std::string_view source = "<input>")
{
    std::vector<std::string> tokens;
    std::string line;
    while (std::getline(in, line)) {
        const auto first = line.find_first_not_of(" \t\r\f\v");
        if (first == std::string::npos || line[first] == '#')
            continue;
        const auto last = line.find_last_not_of(" \t\r\f\v");
        tokens.push_back(line.substr(first, last - first + 1));
    }
    if (tokens.empty())
        throw DataError(std::string(source) + ": no labels found");
    return make_labeling(std::span<const std::string>(tokens));
}

inline Labeling parse_labeling(std::string_view text)
{
    std::istringstream in{std::string(text)};
    return parse_labeling(in);
}

inline Labeling read_labeling_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw DataError(path.string() + ": cannot open label file");
    return parse_labeling(in, path.string());
}

/// R x S table of joint counts with cached margins.
class ContingencyTable {
public:
    /// Row-major counts. Every row and column must have a positive sum.
    ContingencyTable(std::size_t rows, std::size_t cols, std::vector<std::uint64_t> counts)
        : rows_(rows), cols_(cols), counts_(std::move(counts)), row_sums_(rows, 0), col_sums_(cols, 0)
    {
        if (rows == 0 || cols == 0)
            throw DataError("contingency table must have at least one row and one column");
        if (counts_.size() != rows * cols)
            throw DataError("contingency table has " + std::to_string(counts_.size()) + " cells, expected " +
                            std::to_string(rows * cols));
        for (std::size_t r = 0; r < rows_; ++r)
            for (std::size_t s = 0; s < cols_; ++s) {
                const auto c = counts_[r * cols_ + s];
                row_sums_[r] += c;
                col_sums_[s] += c;
                total_ += c;
            }
        for (std::size_t r = 0; r < rows_; ++r)
            if (row_sums_[r] == 0)
                throw DataError("contingency table row " + std::to_string(r) + " is empty");
        for (std::size_t s = 0; s < cols_; ++s)
            if (col_sums_[s] == 0)
                throw DataError("contingency table column " + std::to_string(s) + " is empty");
    }

    static ContingencyTable from_rows(const std::vector<std::vector<std::uint64_t>>& rows)
    {
        const std::size_t cols = rows.empty() ? 0 : rows.front().size();
        std::vector<std::uint64_t> flat;
        flat.reserve(rows.size() * cols);
        for (const auto& row : rows) {
            if (row.size() != cols)
                throw DataError("contingency table rows have unequal lengths");
            flat.insert(flat.end(), row.begin(), row.end());
        }
        return ContingencyTable(rows.size(), cols, std::move(flat));
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::uint64_t total() const noexcept { return total_; }
    std::uint64_t operator()(std::size_t r, std::size_t s) const { return counts_[r * cols_ + s]; }
    std::span<const std::uint64_t> counts() const noexcept { return counts_; }
    std::span<const std::uint64_t> row_sums() const noexcept { return row_sums_; }
    std::span<const std::uint64_t> col_sums() const noexcept { return col_sums_; }

    ContingencyTable transposed() const
    {
        std::vector<std::uint64_t> t(counts_.size());
        for (std::size_t r = 0; r < rows_; ++r)
            for (std::size_t s = 0; s < cols_; ++s)
                t[s * rows_ + r] = counts_[r * cols_ + s];
        return ContingencyTable(cols_, rows_, std::move(t));
    }

    friend bool operator==(const ContingencyTable& x, const ContingencyTable& y)
    {
        return x.rows_ == y.rows_ && x.cols_ == y.cols_ && x.counts_ == y.counts_;
    }

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<std::uint64_t> counts_;
    std::vector<std::uint64_t> row_sums_;
    std::vector<std::uint64_t> col_sums_;
    std::uint64_t total_ = 0;
};

/// Joint counts of two labelings of the same objects, paired by position.
inline ContingencyTable build_contingency(const Labeling& first, const Labeling& second)
{
    if (first.size() != second.size())
        throw DataError("labelings have different lengths: " + std::to_string(first.size()) + " and " +
                        std::to_string(second.size()));
    const std::size_t rows = first.groups();
    const std::size_t cols = second.groups();
    std::vector<std::uint64_t> counts(rows * cols, 0);
    for (std::size_t i = 0; i < first.size(); ++i)
        ++counts[std::size_t{first.assignments[i]} * cols + second.assignments[i]];
    return ContingencyTable(rows, cols, std::move(counts));
}

} // namespace rmi
