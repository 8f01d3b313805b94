#include "drpinns/errors.hpp"

#include <utility>

namespace drpinns {

NonFiniteLoss::NonFiniteLoss(std::string term)
    : NumericalError("non-finite loss in term '" + term + "'"), term_(std::move(term)) {}

}  // namespace drpinns
