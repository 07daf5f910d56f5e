#include "doe/doe_result.hpp"
#include "doe/errors.hpp"
#include "doe/lace.hpp"
#include "doe/lp.hpp"
#include "doe/nlp.hpp"

namespace doe {

DoeResult run_engine(const Feeder& f, const std::string& engine, DoeCase c) {
  if (engine == "lace") return run_lace(f, c);
  if (engine == "lp") return run_lp_doe(f, c);
  if (engine == "nlp") return run_nlp_doe(f, c);
  throw ValidationError("unknown engine \"" + engine + "\" (expected lace, lp or nlp)");
}

}  // namespace doe
