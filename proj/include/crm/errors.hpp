#pragma once

#include <stdexcept>
#include <string>

namespace crm {

/// Invalid input: wrong dimensions, out-of-range parameters, malformed files.
class argument_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A computation could not produce a finite, meaningful value.
class numeric_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Every kernel weight vanished, so the ratio estimator is undefined.
class no_effective_samples : public numeric_error {
public:
    no_effective_samples()
        : numeric_error("no effective samples: total kernel weight is zero") {}
};

/// Normal equations of a least squares fit are singular.
class degenerate_design : public numeric_error {
public:
    using numeric_error::numeric_error;
};

/// t1 <= 0 in the finite-sample bound; carries the offending margin t*D0 - K2*D2*d^2*b^2.
class vacuous_regime : public numeric_error {
public:
    explicit vacuous_regime(double margin)
        : numeric_error("vacuous regime: t*D0 - K2*D2*d^2*b^2 = " + std::to_string(margin) +
                        " <= 0"),
          margin_(margin) {}
    double margin() const noexcept { return margin_; }

private:
    double margin_;
};

/// Markov chain is reducible or periodic.
class not_mixing : public numeric_error {
public:
    using numeric_error::numeric_error;
};

/// Observation has zero likelihood under every latent state.
class inconsistent_observation : public numeric_error {
public:
    using numeric_error::numeric_error;
};

}  // namespace crm
