#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "tempo/errors.hpp"
#include "tempo/rng.hpp"
#include "tempo/time.hpp"

namespace tempo {

enum class ProcessKind {
    wiener,
    two_state_markov,
    constant,
};

// Observed physical process. Evolution over a span is exact in
// distribution: the Wiener increment is one normal draw per component, the
// Markov state flips with the parity probability of a Poisson flip count.
// Two-state values are 0 and 1.
struct ProcessModel {
    ProcessKind kind{ProcessKind::constant};
    double sigma{1.0};        // wiener: stddev per sqrt(second), per component
    double flip_rate{1.0};    // two_state_markov: flips per second
    std::vector<double> state{0.0};

    static ProcessModel wiener(double sigma_per_sqrt_s, std::size_t dim = 1) {
        ProcessModel p;
        p.kind = ProcessKind::wiener;
        p.sigma = sigma_per_sqrt_s;
        p.state.assign(dim, 0.0);
        p.validate();
        return p;
    }

    static ProcessModel two_state_markov(double flip_rate_per_s) {
        ProcessModel p;
        p.kind = ProcessKind::two_state_markov;
        p.flip_rate = flip_rate_per_s;
        p.state.assign(1, 0.0);
        p.validate();
        return p;
    }

    static ProcessModel constant(double value) {
        ProcessModel p;
        p.kind = ProcessKind::constant;
        p.state.assign(1, value);
        return p;
    }

    void validate() const {
        switch (kind) {
            case ProcessKind::wiener:
                if (!(sigma > 0.0)) throw InvalidDistribution("wiener sigma must be > 0");
                if (state.empty()) throw InvalidDistribution("wiener needs dim >= 1");
                break;
            case ProcessKind::two_state_markov:
                if (!(flip_rate > 0.0))
                    throw InvalidDistribution("flip rate must be > 0");
                break;
            case ProcessKind::constant:
                break;
        }
    }

    void evolve(Span dt, RngStream& rng) {
        if (dt.ns <= 0) return;
        double secs = dt.seconds();
        switch (kind) {
            case ProcessKind::wiener: {
                double scale = sigma * std::sqrt(secs);
                for (double& x : state) x += scale * draw_standard_normal(rng);
                break;
            }
            case ProcessKind::two_state_markov: {
                // P(odd number of flips in dt) for a Poisson flip process.
                double p_odd = 0.5 * (1.0 - std::exp(-2.0 * flip_rate * secs));
                if (rng.bernoulli(p_odd)) state[0] = 1.0 - state[0];
                break;
            }
            case ProcessKind::constant:
                break;
        }
    }

    // Squared distance between two observations of this process.
    static double sq_error(const std::vector<double>& u, const std::vector<double>& v) {
        double s = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) {
            double d = u[i] - v[i];
            s += d * d;
        }
        return s;
    }
};

}  // namespace tempo
