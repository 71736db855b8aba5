# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled Gillespie event loop.

Mirrors ``_kmc_py.advance`` operation for operation (same uniforms, same
floating point order), so both backends produce identical trajectories.
"""
from cpython.pycapsule cimport PyCapsule_GetPointer
from libc.math cimport log1p
from libc.stdint cimport int8_t, int32_t, int64_t, uint8_t
from numpy.random cimport bitgen_t

cdef enum:
    _REACHED_T_STOP = 0
    _FAILED = 1
    _MAX_EVENTS = 2

REACHED_T_STOP = _REACHED_T_STOP
FAILED = _FAILED
MAX_EVENTS = _MAX_EVENTS

BACKEND = "compiled"


cdef inline void _move(int32_t[:, :, ::1] bag, int32_t[:, ::1] pos, int64_t[:, ::1] count,
                       int8_t[:, ::1] cls, int s, int32_t link, int newc) noexcept nogil:
    cdef int oldc = cls[s, link]
    cdef int32_t i = pos[s, link]
    cdef int32_t moved = bag[s, oldc, count[s, oldc] - 1]
    bag[s, oldc, i] = moved
    pos[s, moved] = i
    count[s, oldc] -= 1
    bag[s, newc, count[s, newc]] = link
    pos[s, link] = <int32_t>count[s, newc]
    count[s, newc] += 1
    cls[s, link] = <int8_t>newc


def advance(const int32_t[:, :, ::1] nbr, const int32_t[:, :, ::1] stab_links,
            const uint8_t[:, ::1] seam, const double[::1] rates,
            uint8_t[:, ::1] occ, int8_t[:, ::1] cls, int32_t[:, :, ::1] bag,
            int32_t[:, ::1] pos, int64_t[:, ::1] count, int64_t[::1] ndef,
            int64_t[::1] h, int64_t[:, ::1] events, double[::1] clock,
            double[::1] area, int64_t[::1] last, object bitgen,
            double t_stop, int64_t max_events, bint stop_on_failure):
    cdef bitgen_t *rng
    capsule = bitgen.capsule
    rng = <bitgen_t *> PyCapsule_GetPointer(capsule, "BitGenerator")

    cdef double r0 = rates[0], r1 = rates[1], r2 = rates[2]
    cdef double rate[3]
    rate[0] = r0
    rate[1] = r1
    rate[2] = r2
    cdef double t = clock[0], t_next = clock[1]
    cdef double a0 = area[0], a1 = area[1]
    cdef double total, u, x, w
    cdef int s, c, s_sel, c_sel, status = _REACHED_T_STOP, failed = -1, j, stab_i, newc
    cdef int64_t k, n_done = 0
    cdef int32_t link, p1, p2, l, stab
    cdef bint found

    with bitgen.lock, nogil:
        while True:
            if t_next < 0.0:
                total = ((count[0, 0] * r0 + count[0, 1] * r1) + count[0, 2] * r2) + \
                        ((count[1, 0] * r0 + count[1, 1] * r1) + count[1, 2] * r2)
                u = rng.next_double(rng.state)
                t_next = t + (-log1p(-u) / total)
            if t_next > t_stop:
                a0 += ndef[0] * (t_stop - t)
                a1 += ndef[1] * (t_stop - t)
                t = t_stop
                status = _REACHED_T_STOP
                break
            a0 += ndef[0] * (t_next - t)
            a1 += ndef[1] * (t_next - t)
            t = t_next
            t_next = -1.0

            total = ((count[0, 0] * r0 + count[0, 1] * r1) + count[0, 2] * r2) + \
                    ((count[1, 0] * r0 + count[1, 1] * r1) + count[1, 2] * r2)
            x = rng.next_double(rng.state) * total
            s_sel = -1
            c_sel = -1
            found = False
            for s in range(2):
                for c in range(3):
                    w = count[s, c] * rate[c]
                    if w > 0.0:
                        s_sel = s
                        c_sel = c
                        if x < w:
                            found = True
                            break
                        x -= w
                if found:
                    break
            k = <int64_t>(rng.next_double(rng.state) * count[s_sel, c_sel])
            if k >= count[s_sel, c_sel]:
                k = count[s_sel, c_sel] - 1
            s = s_sel
            link = bag[s, c_sel, k]

            p1 = nbr[s, link, 0]
            p2 = nbr[s, link, 1]
            occ[s, p1] ^= 1
            occ[s, p2] ^= 1
            if c_sel == 0:
                ndef[s] += 2
            elif c_sel == 2:
                ndef[s] -= 2
            h[s] ^= seam[s, link]
            events[s, c_sel] += 1
            for stab_i in range(2):
                stab = p1 if stab_i == 0 else p2
                for j in range(4):
                    l = stab_links[s, stab, j]
                    newc = occ[s, nbr[s, l, 0]] + occ[s, nbr[s, l, 1]]
                    if newc != cls[s, l]:
                        _move(bag, pos, count, cls, s, l, newc)
            last[0] = s
            last[1] = link
            last[2] = c_sel
            n_done += 1
            if stop_on_failure and ndef[s] == 0 and h[s] != 0:
                status = _FAILED
                failed = s
                break
            if n_done >= max_events:
                status = _MAX_EVENTS
                break

    clock[0] = t
    clock[1] = t_next
    area[0] = a0
    area[1] = a1
    return status, failed
