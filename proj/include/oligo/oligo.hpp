#pragma once

#include "oligo/additive_duopoly.hpp"
#include "oligo/asym_duopoly.hpp"
#include "oligo/curve.hpp"
#include "oligo/errors.hpp"
#include "oligo/game_model.hpp"
#include "oligo/mpne_solver.hpp"
#include "oligo/scalar_function.hpp"
#include "oligo/symmetric_equiv.hpp"
#include "oligo/verifier.hpp"
