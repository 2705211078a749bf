#pragma once

// Report values and their serialisation. Floats are written with 17
// significant digits; non-finite values become the strings "inf", "-inf" and
// "nan".

#include <string>

#include "json.hpp"

#include "ncfractal/algebra.hpp"
#include "ncfractal/seminorm.hpp"

namespace ncfractal::cli {

using ojson = nlohmann::ordered_json;

std::string dump_json(const ojson& j);

/// {"value": v, "tol": tol}
ojson num(double v, double tol);
ojson num(const ExtendedReal& v, double tol);
/// {"value": v, "tol": tol, "pass": pass}
ojson checked(double v, double tol, bool pass);
ojson checked(const ExtendedReal& v, double tol, bool pass);

/// {"blocks": [[[re, im], ...], ...]}
ojson element_json(const Element& x);
/// {"rank": r, "blocks": [{"spectrum": [0|1, ...], "eigenbasis": columns}]}
ojson projection_json(const Projection& p);
ojson matrix_json(const RMatrix& m);

}  // namespace ncfractal::cli
