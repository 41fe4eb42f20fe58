#include "ctg/tensor.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace ctg {

std::size_t shape_size(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t e : shape) n *= e;
    return shape.empty() ? 0 : n;
}

Tensor::Tensor(std::vector<std::size_t> shape)
    : shape_(std::move(shape)), data_(shape_size(shape_), 0.0) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> values)
    : shape_(std::move(shape)), data_(std::move(values)) {
    if (shape_size(shape_) != data_.size()) {
        throw std::invalid_argument("Tensor: shape product " +
                                    std::to_string(shape_size(shape_)) +
                                    " != value count " + std::to_string(data_.size()));
    }
}

void Tensor::fill(double v) {
    for (double& x : data_) x = v;
}

bool Tensor::all_finite() const {
    for (double x : data_) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

Tensor Tensor::reshaped(std::vector<std::size_t> shape) const {
    if (shape_size(shape) != data_.size()) {
        throw std::invalid_argument("Tensor::reshaped: incompatible shape");
    }
    return Tensor(std::move(shape), data_);
}

}  // namespace ctg
