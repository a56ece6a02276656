#include "ruellelab/potential.hpp"

namespace ruellelab {

template class LocallyConstantFn<double>;
template class LocallyConstantFn<std::complex<double>>;

template double sup_norm<double>(const LocallyConstantFn<double>&);
template double sup_norm<std::complex<double>>(const LocallyConstantFn<std::complex<double>>&);
template double theta_seminorm<double>(const LocallyConstantFn<double>&, double);
template double theta_seminorm<std::complex<double>>(const LocallyConstantFn<std::complex<double>>&, double);

}  // namespace ruellelab
