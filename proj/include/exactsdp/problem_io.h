#ifndef EXACTSDP_PROBLEM_IO_H_
#define EXACTSDP_PROBLEM_IO_H_

#include <string>
#include <string_view>

#include <json.hpp>

#include "exactsdp/error.h"
#include "exactsdp/model.h"

namespace exactsdp {

// Raised for malformed problem documents; the message names the offending
// field (e.g. "constraints[1].matrix[0][2]") or the parser's line/column.
class ParseError : public Error {
 public:
  using Error::Error;
};

inline constexpr int kProblemSchemaVersion = 1;

ConicQcqp parse_problem(std::string_view text);
std::string emit_problem(const ConicQcqp& p);

ConicQcqp problem_from_json(const nlohmann::json& doc);
nlohmann::json problem_to_json(const ConicQcqp& p);

ConicQcqp read_problem_file(const std::string& path);
void write_problem_file(const std::string& path, const ConicQcqp& p);

// Dense row-major helpers shared by the report writers.
nlohmann::json matrix_to_json(const Matrix& m);
nlohmann::json vector_to_json(const Vector& v);

}  // namespace exactsdp

#endif  // EXACTSDP_PROBLEM_IO_H_
