#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "tempo/errors.hpp"
#include "tempo/time.hpp"

namespace tempo {

struct SummaryStats {
    std::uint64_t count{0};
    double mean{0.0};
    double p50{0.0};
    double p95{0.0};
    double p99{0.0};
    double max{0.0};
};

// Streaming sample summary for non-negative values. Percentiles are exact
// (sorted samples) up to a capacity cap; past the cap the accumulator folds
// everything into a logarithmic histogram with 0.1% relative bin width, so
// memory stays bounded on arbitrarily long runs. Merging is commutative and
// associative, which is what lets sweep reports combine in any order.
class SampleSummary {
public:
    static constexpr std::size_t exact_cap = 10'000'000;

    void add(double v) {
        ++count_;
        sum_ += v;
        if (v > max_) max_ = v;
        if (!sketch_) {
            exact_.push_back(v);
            if (exact_.size() > exact_cap) to_sketch();
        } else {
            ++hist_[bin_of(v)];
        }
    }

    void merge(const SampleSummary& o) {
        count_ += o.count_;
        sum_ += o.sum_;
        if (o.max_ > max_) max_ = o.max_;
        if (!sketch_ && !o.sketch_ && exact_.size() + o.exact_.size() <= exact_cap) {
            exact_.insert(exact_.end(), o.exact_.begin(), o.exact_.end());
            return;
        }
        if (!sketch_) to_sketch();
        if (o.sketch_) {
            for (const auto& [bin, n] : o.hist_) hist_[bin] += n;
        } else {
            for (double v : o.exact_) ++hist_[bin_of(v)];
        }
    }

    std::uint64_t count() const { return count_; }
    double mean() const { return count_ ? sum_ / static_cast<double>(count_) : 0.0; }
    double max() const { return count_ ? max_ : 0.0; }

    double quantile(double q) const {
        if (count_ == 0) return 0.0;
        if (!sketch_) {
            std::vector<double> v(exact_);
            std::sort(v.begin(), v.end());
            std::size_t idx = static_cast<std::size_t>(
                std::ceil(q * static_cast<double>(v.size())));
            if (idx == 0) idx = 1;
            if (idx > v.size()) idx = v.size();
            return v[idx - 1];
        }
        std::uint64_t target = static_cast<std::uint64_t>(
            std::ceil(q * static_cast<double>(count_)));
        if (target == 0) target = 1;
        std::uint64_t seen = 0;
        for (const auto& [bin, n] : hist_) {
            seen += n;
            if (seen >= target) return value_of(bin);
        }
        return max_;
    }

    SummaryStats stats() const {
        SummaryStats s;
        s.count = count_;
        s.mean = mean();
        s.max = max();
        if (count_) {
            if (!sketch_) {
                // One sort for all three percentiles.
                std::vector<double> v(exact_);
                std::sort(v.begin(), v.end());
                auto pick = [&](double q) {
                    std::size_t idx = static_cast<std::size_t>(
                        std::ceil(q * static_cast<double>(v.size())));
                    if (idx == 0) idx = 1;
                    if (idx > v.size()) idx = v.size();
                    return v[idx - 1];
                };
                s.p50 = pick(0.50);
                s.p95 = pick(0.95);
                s.p99 = pick(0.99);
            } else {
                s.p50 = quantile(0.50);
                s.p95 = quantile(0.95);
                s.p99 = quantile(0.99);
            }
        }
        return s;
    }

    // Trades the exact sample buffer for the log-binned histogram early;
    // useful when many summaries are held at once.
    void compact() {
        if (!sketch_) to_sketch();
    }

private:
    static constexpr double inv_log_step = 1000.49983334166664;  // 1 / log1p(1e-3)

    static std::int32_t bin_of(double v) {
        if (v <= 0.0) return std::numeric_limits<std::int32_t>::min();
        return static_cast<std::int32_t>(std::floor(std::log(v) * inv_log_step));
    }

    static double value_of(std::int32_t bin) {
        if (bin == std::numeric_limits<std::int32_t>::min()) return 0.0;
        // Upper edge of the bin keeps quantiles conservative.
        return std::exp(static_cast<double>(bin + 1) / inv_log_step);
    }

    void to_sketch() {
        sketch_ = true;
        for (double v : exact_) ++hist_[bin_of(v)];
        exact_.clear();
        exact_.shrink_to_fit();
    }

    bool sketch_{false};
    std::uint64_t count_{0};
    double sum_{0.0};
    double max_{0.0};
    std::vector<double> exact_;
    std::map<std::int32_t, std::uint64_t> hist_;
};

inline SampleSummary summarize_spans(const std::vector<Span>& spans) {
    SampleSummary s;
    for (Span d : spans) s.add(d.seconds());
    return s;
}

// One row of a timing report. Scalar quantities (probabilities, fractions,
// rates) repeat the value across the stat columns so the CSV schema stays
// rectangular.
struct MetricRow {
    std::string name;
    SummaryStats stats;
    bool scalar{false};

    static MetricRow from_summary(std::string name, const SampleSummary& s) {
        MetricRow r;
        r.name = std::move(name);
        r.stats = s.stats();
        return r;
    }

    static MetricRow from_scalar(std::string name, double value, std::uint64_t count) {
        MetricRow r;
        r.name = std::move(name);
        r.stats = SummaryStats{count, value, value, value, value, value};
        r.scalar = true;
        return r;
    }
};

}  // namespace tempo
