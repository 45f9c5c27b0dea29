#include "forestmap/split.hpp"

#include <cmath>
#include <stdexcept>

#include "forestmap/rng.hpp"

namespace forestmap {

std::size_t round_half_up(double v) {
    return static_cast<std::size_t>(std::floor(v + 0.5));
}

namespace {

void check_fraction(double f, const char* name) {
    if (!(f > 0.0) || !(f < 1.0)) {
        throw std::invalid_argument(std::string(name) + " must be strictly between 0 and 1");
    }
}

// Appends the id-sorted rows of one stratum, shuffled, split at
// round_half_up(train_fraction * n).
void split_rows(const PlotTable& table, const std::vector<std::size_t>& rows, const SplitSpec& spec,
                std::uint64_t seed, std::vector<std::size_t>& train, std::vector<std::size_t>& test,
                std::vector<std::size_t>& calib, std::vector<std::size_t>& valid) {
    (void)table;
    std::vector<std::size_t> shuffled = rows;
    Rng rng(seed);
    rng.shuffle(shuffled);

    const std::size_t n_train = round_half_up(spec.train_fraction * static_cast<double>(shuffled.size()));
    const std::size_t n_calib = round_half_up(spec.calib_fraction * static_cast<double>(n_train));
    for (std::size_t i = 0; i < shuffled.size(); ++i) {
        if (i < n_train) {
            train.push_back(shuffled[i]);
            (i < n_calib ? calib : valid).push_back(shuffled[i]);
        } else {
            test.push_back(shuffled[i]);
        }
    }
}

} // namespace

DatasetSplit split_dataset(const PlotTable& table, const SplitSpec& spec) {
    check_fraction(spec.train_fraction, "train_fraction");
    check_fraction(spec.calib_fraction, "calib_fraction");
    if (table.size() < 10) {
        throw std::invalid_argument("split_dataset: need at least 10 plots, got " +
                                    std::to_string(table.size()));
    }

    std::vector<std::size_t> train, test, calib, valid;
    if (spec.stratify_by_type) {
        for (int code = 1; code <= 3; ++code) {
            std::vector<std::size_t> stratum;
            for (std::size_t r : table.order_by_id()) {
                if (static_cast<int>(table[r].forest_type) == code) stratum.push_back(r);
            }
            if (stratum.empty()) continue;
            split_rows(table, stratum, spec, derive_seed(spec.seed, {0x5742u, static_cast<std::uint64_t>(code)}),
                       train, test, calib, valid);
        }
    } else {
        split_rows(table, table.order_by_id(), spec, spec.seed, train, test, calib, valid);
    }

    if (train.empty() || test.empty() || calib.empty() || valid.empty()) {
        throw std::invalid_argument("split_dataset: fractions leave an empty part for n=" +
                                    std::to_string(table.size()));
    }

    DatasetSplit out{table.subset(train, table.name()), table.subset(test, table.name()),
                     table.subset(calib, table.name()), table.subset(valid, table.name())};
    return out;
}

} // namespace forestmap
