#pragma once

#include "errors.hpp"
#include "special_functions.hpp"
#include "ode.hpp"
#include "anchored.hpp"
#include "variational.hpp"
#include "parallel.hpp"
#include "melnikov.hpp"
#include "verify.hpp"
#include "systems/duffing.hpp"
#include "systems/pendula.hpp"
#include "systems/rigid_body.hpp"
#include "systems/beam.hpp"
#include "systems/registry.hpp"
