#include "termharm/error.hpp"

namespace termharm {

void fail(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

}  // namespace termharm
