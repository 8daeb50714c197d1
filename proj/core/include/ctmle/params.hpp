#ifndef CTMLE_PARAMS_HPP
#define CTMLE_PARAMS_HPP

#include <Eigen/Dense>

#include "ctmle/errors.hpp"

namespace ctmle {

/// Parameter vector theta together with the box constraints defining the
/// admissible set. All estimation routines keep iterates inside the box.
struct ParamVector {
    Eigen::VectorXd values;
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;

    ParamVector() = default;
    ParamVector(Eigen::VectorXd v, Eigen::VectorXd lo, Eigen::VectorXd hi)
        : values(std::move(v)), lower(std::move(lo)), upper(std::move(hi)) {
        validate();
    }

    int dim() const { return static_cast<int>(values.size()); }

    void validate() const {
        if (values.size() < 1)
            throw ConfigError("ParamVector: dimension must be >= 1");
        if (lower.size() != values.size() || upper.size() != values.size())
            throw ConfigError("ParamVector: bound dimensions do not match values");
        if (!values.allFinite() || !lower.allFinite() || !upper.allFinite())
            throw ConfigError("ParamVector: entries must be finite");
        for (int i = 0; i < values.size(); ++i) {
            if (lower[i] > values[i] || values[i] > upper[i])
                throw ConfigError("ParamVector: values must satisfy lower <= values <= upper");
        }
    }

    /// Copy with the values projected onto the box.
    ParamVector projected(const Eigen::VectorXd& v) const {
        ParamVector out = *this;
        out.values = v.cwiseMax(lower).cwiseMin(upper);
        return out;
    }

    bool contains(const Eigen::VectorXd& v) const {
        return (v.array() >= lower.array()).all() && (v.array() <= upper.array()).all();
    }
};

} // namespace ctmle

#endif
