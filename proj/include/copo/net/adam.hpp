#pragma once

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <vector>

namespace copo::net {

// Adaptive-moment descent. step() applies params -= lr * m_hat/(sqrt(v_hat)+eps);
// callers minimizing a loss pass the loss gradient directly.
class Adam {
public:
    Adam() = default;
    Adam(int size, double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
        : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps), m_(size, 0.0), v_(size, 0.0) {}

    double lr() const { return lr_; }
    void set_lr(double lr) { lr_ = lr; }
    int steps_taken() const { return t_; }

    // Returns false and leaves everything untouched when the gradient
    // contains non-finite entries (the caller decides how loudly to warn).
    bool step(std::vector<double>& params, const std::vector<double>& grad) {
        if (params.size() != m_.size() || grad.size() != m_.size()) {
            throw std::invalid_argument("optimizer state size mismatch");
        }
        for (double g : grad) {
            if (!std::isfinite(g)) return false;
        }
        ++t_;
        const double bc1 = 1.0 - std::pow(beta1_, t_);
        const double bc2 = 1.0 - std::pow(beta2_, t_);
        for (size_t i = 0; i < m_.size(); ++i) {
            m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grad[i];
            v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grad[i] * grad[i];
            params[i] -= lr_ * (m_[i] / bc1) / (std::sqrt(v_[i] / bc2) + eps_);
        }
        return true;
    }

    // Checkpoint plumbing: [t, m..., v...] as one flat vector.
    std::vector<double> serialize() const {
        std::vector<double> out;
        out.reserve(1 + 2 * m_.size());
        out.push_back(static_cast<double>(t_));
        out.insert(out.end(), m_.begin(), m_.end());
        out.insert(out.end(), v_.begin(), v_.end());
        return out;
    }
    void restore(const std::vector<double>& blob) {
        if (blob.size() != 1 + 2 * m_.size()) {
            throw std::runtime_error("optimizer state blob has wrong length");
        }
        t_ = static_cast<int>(blob[0]);
        std::copy(blob.begin() + 1, blob.begin() + 1 + m_.size(), m_.begin());
        std::copy(blob.begin() + 1 + m_.size(), blob.end(), v_.begin());
    }

private:
    double lr_ = 1e-3, beta1_ = 0.9, beta2_ = 0.999, eps_ = 1e-8;
    int t_ = 0;
    std::vector<double> m_, v_;
};

}  // namespace copo::net
