#pragma once

#include <string>

#include "json.hpp"
#include "padicpar/function_space.hpp"
#include "padicpar/padic.hpp"

namespace padicverify {

using json = nlohmann::json;

/// Parses "lo:digits" as written by PAdicScalar::digit_string. Digits are
/// base-36 characters for p <= 36 and '.'-separated decimals above.
padic::PAdicScalar parse_digit_string(const std::string& s, int p, padic::Window w = {});

/// {p, n, pieces:[{center, radius_exp, coeff}], tail:{M, s, c} or null, lambda, C}.
/// `center` holds one digit string per coordinate; a tail may carry a `table`
/// of values for the shells M+1.. ahead of its power law.
json function_to_json(const padic::LocallyConstantFn& f);

/// Builds the function on the grid B_M / B_ell; pieces must fit that grid.
/// A bare number is the constant function.
padic::LocallyConstantFn function_from_json(const json& j, int p, int n, int ell, int M);

}  // namespace padicverify
