#pragma once

#include <besovbilin/error.hpp>
#include <besovbilin/parallel.hpp>
#include <besovbilin/grid_fourier.hpp>
#include <besovbilin/windows.hpp>
#include <besovbilin/norms.hpp>
#include <besovbilin/symbol_class.hpp>
#include <besovbilin/bilinear.hpp>
#include <besovbilin/symbol_lib.hpp>
#include <besovbilin/experiments.hpp>
#include <besovbilin/io.hpp>
