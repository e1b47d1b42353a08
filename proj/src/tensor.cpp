#include "mter/tensor.hpp"

namespace mter {

Tensor3 mode_product(const Tensor3& core, const Matrix& m, int mode) {
  switch (mode) {
    case 1: {
      if (m.cols() != core.dim1()) throw std::invalid_argument("mode_product: shape mismatch on mode 1");
      Tensor3 out(m.rows(), core.dim2(), core.dim3());
      for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t j = 0; j < core.dim2(); ++j)
          for (std::size_t k = 0; k < core.dim3(); ++k) {
            double s = 0.0;
            for (std::size_t i = 0; i < core.dim1(); ++i) s += m(r, i) * core(i, j, k);
            out(r, j, k) = s;
          }
      return out;
    }
    case 2: {
      if (m.cols() != core.dim2()) throw std::invalid_argument("mode_product: shape mismatch on mode 2");
      Tensor3 out(core.dim1(), m.rows(), core.dim3());
      for (std::size_t i = 0; i < core.dim1(); ++i)
        for (std::size_t r = 0; r < m.rows(); ++r)
          for (std::size_t k = 0; k < core.dim3(); ++k) {
            double s = 0.0;
            for (std::size_t j = 0; j < core.dim2(); ++j) s += m(r, j) * core(i, j, k);
            out(i, r, k) = s;
          }
      return out;
    }
    case 3: {
      if (m.cols() != core.dim3()) throw std::invalid_argument("mode_product: shape mismatch on mode 3");
      Tensor3 out(core.dim1(), core.dim2(), m.rows());
      for (std::size_t i = 0; i < core.dim1(); ++i)
        for (std::size_t j = 0; j < core.dim2(); ++j)
          for (std::size_t r = 0; r < m.rows(); ++r) {
            double s = 0.0;
            for (std::size_t k = 0; k < core.dim3(); ++k) s += m(r, k) * core(i, j, k);
            out(i, j, r) = s;
          }
      return out;
    }
    default:
      throw std::invalid_argument("mode_product: mode must be 1, 2 or 3");
  }
}

}  // namespace mter
