// ramimo - repeater-assisted massive MIMO link simulator
// Copyright (C) 2026 the ramimo authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef RAMIMO_PARALLEL_HPP
#define RAMIMO_PARALLEL_HPP

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ramimo {

inline int hardware_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

/// Run body(i) for i in [0, n). With threads <= 1 (or without OpenMP) this
/// is a plain serial loop — the reference path used by the tests. Each
/// iteration must be independent and must write only to its own slots;
/// results then do not depend on the thread count.
template <typename Body>
void parallel_for(long n, int threads, Body&& body) {
#ifdef _OPENMP
    if (threads > 1) {
#pragma omp parallel for schedule(dynamic) num_threads(threads)
        for (long i = 0; i < n; ++i) {
            body(i);
        }
        return;
    }
#else
    (void)threads;
#endif
    for (long i = 0; i < n; ++i) {
        body(i);
    }
}

}  // namespace ramimo

#endif  // RAMIMO_PARALLEL_HPP
