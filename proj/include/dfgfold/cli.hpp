/*!
  \file cli.hpp
  \brief The `dfgfold` command line: gen, match, schedule, fold, simulate, verify, explore and cost.
*/

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dfgfold
{

namespace exit_code
{
inline constexpr int ok = 0;
inline constexpr int user_error = 1;
inline constexpr int verification_failure = 2;
} // namespace exit_code

/*! \brief Runs one command; `args` excludes the program name. */
int run( std::vector<std::string> const& args, std::ostream& out, std::ostream& err );

int run( int argc, char** argv );

} // namespace dfgfold
