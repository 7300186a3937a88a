#include "ciris/optim.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace ciris {

LrSchedule::LrSchedule(std::vector<std::pair<int, double>> steps) : steps_(std::move(steps)) {
    if (steps_.empty()) throw std::invalid_argument("learning-rate schedule is empty");
    std::sort(steps_.begin(), steps_.end());
    if (steps_.front().first != 0)
        throw std::invalid_argument("learning-rate schedule must start at epoch 0");
    for (const auto& [e, r] : steps_)
        if (!(r > 0)) throw std::invalid_argument("learning rate must be positive");
}

double LrSchedule::rate(int epoch) const {
    if (steps_.empty()) throw std::logic_error("learning-rate schedule is empty");
    double r = steps_.front().second;
    for (const auto& [start, rate] : steps_)
        if (epoch >= start) r = rate;
    return r;
}

LrSchedule LrSchedule::paper() { return LrSchedule({{0, 0.01}, {10, 0.1}, {130, 0.01}, {160, 0.001}}); }

LrSchedule LrSchedule::desk() { return LrSchedule({{0, 0.01}, {3, 0.1}, {21, 0.01}, {27, 0.001}}); }

LrSchedule LrSchedule::parse(const std::string& text) {
    std::vector<std::pair<int, double>> steps;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto colon = item.find(':');
        if (colon == std::string::npos)
            throw std::invalid_argument("bad schedule entry '" + item + "', expected epoch:rate");
        try {
            steps.emplace_back(std::stoi(item.substr(0, colon)), std::stod(item.substr(colon + 1)));
        } catch (const std::logic_error&) {
            throw std::invalid_argument("bad schedule entry '" + item + "'");
        }
    }
    return LrSchedule(std::move(steps));
}

std::string LrSchedule::to_string() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < steps_.size(); ++i) {
        if (i) os << ',';
        os << steps_[i].first << ':' << steps_[i].second;
    }
    return os.str();
}

template <typename T>
StepReport sgd_step(std::span<Parameter<T>* const> params, OptimState<T>& state, int epoch) {
    StepReport report;
    report.learning_rate = state.schedule.rate(epoch);
    if (state.velocity.size() != params.size()) {
        state.velocity.clear();
        for (const auto* p : params) state.velocity.emplace_back(p->value.shape());
    }

    double sq = 0;
    for (const auto* p : params) {
        if (!p->trainable) continue;
        if (p->grad.shape() != p->value.shape())
            throw std::invalid_argument("sgd_step: parameter '" + p->name + "' has no gradient");
        double local = 0;
        for (std::size_t i = 0; i < p->grad.size(); ++i) {
            const double r = p->grad.re()[i], m = p->real_only ? 0.0 : p->grad.im()[i];
            local += r * r + m * m;
        }
        if (!std::isfinite(local))
            throw std::domain_error("non-finite gradient in parameter '" + p->name + "'");
        sq += local;
    }
    report.grad_norm = std::sqrt(sq);
    if (report.grad_norm > state.clip_norm) report.clip_scale = state.clip_norm / report.grad_norm;

    const double mu = state.momentum, lr = report.learning_rate, cs = report.clip_scale;
    for (std::size_t k = 0; k < params.size(); ++k) {
        auto* p = params[k];
        if (!p->trainable) continue;
        auto& v = state.velocity[k];
        if (v.shape() != p->value.shape())
            throw std::invalid_argument("sgd_step: velocity shape mismatch for '" + p->name + "'");
        auto update = [&](std::span<T> w, std::span<T> vel, std::span<const T> g) {
            for (std::size_t i = 0; i < w.size(); ++i) {
                const double gi = cs * g[i];
                const double vn = mu * vel[i] - lr * gi;
                vel[i] = T(vn);
                w[i] = T(w[i] + mu * vn - lr * gi);
            }
        };
        update(p->value.re(), v.re(), p->grad.re());
        if (!p->real_only) update(p->value.im(), v.im(), p->grad.im());
    }
    return report;
}

template StepReport sgd_step(std::span<Parameter<float>* const>, OptimState<float>&, int);
template StepReport sgd_step(std::span<Parameter<double>* const>, OptimState<double>&, int);

}  // namespace ciris
