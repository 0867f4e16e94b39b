#pragma once

#include "gevrey/errors.hpp"
#include "gevrey/series.hpp"
#include "gevrey/symbol.hpp"
#include "gevrey/normalform.hpp"
#include "gevrey/airy.hpp"
#include "gevrey/ode.hpp"
#include "gevrey/propagator.hpp"
#include "gevrey/majorant.hpp"
#include "gevrey/planner.hpp"
#include "gevrey/fixedpoint.hpp"
#include "gevrey/io.hpp"
#include "gevrey/vdw.hpp"
