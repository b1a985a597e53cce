#pragma once

#include "badflow/cantor.hpp"
#include "badflow/core.hpp"
#include "badflow/curve.hpp"
#include "badflow/diophantine.hpp"
#include "badflow/exterior.hpp"
#include "badflow/flows.hpp"
#include "badflow/intmat.hpp"
#include "badflow/lattice.hpp"
#include "badflow/linalg.hpp"
#include "badflow/rational.hpp"
