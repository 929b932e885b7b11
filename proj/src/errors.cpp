#include "walign/errors.hpp"

namespace walign {

void throw_input(const std::string& what) { throw InputError(what); }

}  // namespace walign
