#include <dfgfold/cli.hpp>

int main( int argc, char** argv )
{
  return dfgfold::run( argc, argv );
}
