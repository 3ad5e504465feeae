#pragma once

#include "trimer1d/errors.hpp"
#include "trimer1d/specfun.hpp"
#include "trimer1d/parallel.hpp"
#include "trimer1d/shapes.hpp"
#include "trimer1d/chebgrid.hpp"
#include "trimer1d/masses.hpp"
#include "trimer1d/twobody.hpp"
#include "trimer1d/bo.hpp"
#include "trimer1d/stm.hpp"
#include "trimer1d/threebody.hpp"
#include "trimer1d/analysis.hpp"
#include "trimer1d/io.hpp"
