#include <catch2/catch_amalgamated.hpp>
#include <oceanprov/oceanprov.hpp>
