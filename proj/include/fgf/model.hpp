// model.hpp
#pragma once

#include "fgf/core.hpp"
#include "fgf/rng.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <type_traits>
#include <string>

namespace fgf {

/**
 * Stationary nonlinear state-space model
 *
 *   x_t = process(x_{t-1}, v_t),   y_t = observe(x_t, w_t),
 *
 * with v and w standard normal. process and observe act column-wise on
 * batches: column j of the result depends only on column j of the inputs.
 * A single point is a batch of one column.
 */
template <typename Scalar>
struct StateSpaceModel {
    using Batch = fgf::Batch<Scalar>;
    using BatchFunction = std::function<Batch(const Batch& state, const Batch& noise)>;
    using Likelihood = std::function<Scalar(const Vector<Scalar>& y, const Vector<Scalar>& x)>;

    std::string name;
    Eigen::Index state_dim = 1;
    Eigen::Index meas_dim = 1;
    Eigen::Index process_noise_dim = 1;
    Eigen::Index obs_noise_dim = 1;
    BatchFunction process;
    BatchFunction observe;
    /// p(y|x), present when it is available in closed form.
    std::optional<Likelihood> likelihood;

    Vector<Scalar> process_point(const Vector<Scalar>& x, const Vector<Scalar>& v) const
    {
        return process(x, v).col(0);
    }

    Vector<Scalar> observe_point(const Vector<Scalar>& x, const Vector<Scalar>& w) const
    {
        return observe(x, w).col(0);
    }

    void validate() const
    {
        if (state_dim < 1 || meas_dim < 1 || process_noise_dim < 1 || obs_noise_dim < 1) {
            throw std::invalid_argument("StateSpaceModel '" + name + "': dimensions must be positive");
        }
        if (!process || !observe) {
            throw std::invalid_argument("StateSpaceModel '" + name + "': process and observe are required");
        }
    }
};

using StateSpaceModeld = StateSpaceModel<double>;

template <typename Scalar>
struct Trajectory {
    Matrix<Scalar> states;        ///< state_dim x steps
    Matrix<Scalar> measurements;  ///< meas_dim x steps
};

/**
 * Simulates `steps` transitions from `init_state`. Step t draws v then w from
 * one seeded stream, so identical seeds give bit-identical trajectories.
 * Column t holds x_{t+1} = process(x_t, v) and y = observe(x_{t+1}, w).
 */
template <typename Scalar>
Trajectory<Scalar> simulate(const StateSpaceModel<Scalar>& model, const std::type_identity_t<Vector<Scalar>>& init_state, int steps,
                            std::uint64_t seed)
{
    model.validate();
    if (steps < 1) {
        throw std::invalid_argument("simulate: steps must be >= 1");
    }
    if (init_state.size() != model.state_dim) {
        throw std::invalid_argument("simulate: initial state has wrong dimension");
    }
    NormalRng rng(seed);
    Trajectory<Scalar> out;
    out.states.resize(model.state_dim, steps);
    out.measurements.resize(model.meas_dim, steps);
    Vector<Scalar> x = init_state;
    for (int t = 0; t < steps; ++t) {
        const Vector<Scalar> v = rng.normal_vector(model.process_noise_dim).template cast<Scalar>();
        const Vector<Scalar> w = rng.normal_vector(model.obs_noise_dim).template cast<Scalar>();
        x = model.process_point(x, v);
        const Vector<Scalar> y = model.observe_point(x, w);
        if (!x.allFinite() || !y.allFinite()) {
            throw NumericalError("simulate: non-finite value at step " + std::to_string(t));
        }
        out.states.col(t) = x;
        out.measurements.col(t) = y;
    }
    return out;
}

}  // namespace fgf
