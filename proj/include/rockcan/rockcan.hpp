#pragma once

#include "asymptotics.hpp"
#include "dynamics.hpp"
#include "equilibria.hpp"
#include "error.hpp"
#include "frictionless.hpp"
#include "frobenius.hpp"
#include "integrate.hpp"
#include "params.hpp"
#include "phenomena.hpp"
#include "reduced.hpp"
#include "special.hpp"
