"""Pure-Python event loop; reference for the compiled kernel in ``_kmc_core.pyx``.

Both kernels draw three uniforms per event from the same numpy bit generator
(waiting time, channel, link within channel) and perform identical floating
point operations, so a given seed yields the same trajectory on either.
"""
from __future__ import annotations

import math

import numpy as np

REACHED_T_STOP = 0
FAILED = 1
MAX_EVENTS = 2

BACKEND = "python"


def advance(nbr, stab_links, seam, rates, occ, cls, bag, pos, count, ndef, h,
            events, clock, area, last, bitgen, t_stop, max_events, stop_on_failure):
    """Run Gillespie events until ``t_stop``, a failure, or ``max_events``.

    Returns ``(status, failed_sector)``; ``failed_sector`` is -1 unless
    ``status == FAILED``.
    """
    random = np.random.Generator(bitgen).random
    r0, r1, r2 = float(rates[0]), float(rates[1]), float(rates[2])
    rate = (r0, r1, r2)
    # work on Python lists; copied back on exit
    occ_l = [occ[0].tolist(), occ[1].tolist()]
    cls_l = [cls[0].tolist(), cls[1].tolist()]
    bag_l = [[bag[s, c].tolist() for c in range(3)] for s in (0, 1)]
    pos_l = [pos[0].tolist(), pos[1].tolist()]
    cnt = [count[0].tolist(), count[1].tolist()]
    nd = ndef.tolist()
    hh = h.tolist()
    ev = [events[0].tolist(), events[1].tolist()]
    nbr_l = [nbr[0].tolist(), nbr[1].tolist()]
    stab_l = [stab_links[0].tolist(), stab_links[1].tolist()]
    seam_l = [seam[0].tolist(), seam[1].tolist()]
    t = float(clock[0])
    t_next = float(clock[1])
    a0, a1 = float(area[0]), float(area[1])
    last_s, last_l, last_c = int(last[0]), int(last[1]), int(last[2])

    status, failed = REACHED_T_STOP, -1
    n_done = 0
    while True:
        if t_next < 0.0:
            c0, c1 = cnt[0], cnt[1]
            total = (c0[0] * r0 + c0[1] * r1 + c0[2] * r2) + (c1[0] * r0 + c1[1] * r1 + c1[2] * r2)
            u = random()
            t_next = t + (-math.log1p(-u) / total)
        if t_next > t_stop:
            a0 += nd[0] * (t_stop - t)
            a1 += nd[1] * (t_stop - t)
            t = t_stop
            status = REACHED_T_STOP
            break
        a0 += nd[0] * (t_next - t)
        a1 += nd[1] * (t_next - t)
        t = t_next
        t_next = -1.0

        c0, c1 = cnt[0], cnt[1]
        total = (c0[0] * r0 + c0[1] * r1 + c0[2] * r2) + (c1[0] * r0 + c1[1] * r1 + c1[2] * r2)
        x = random() * total
        s_sel, c_sel = -1, -1
        for s in (0, 1):
            cs = cnt[s]
            for c in (0, 1, 2):
                w = cs[c] * rate[c]
                if w > 0.0:
                    s_sel, c_sel = s, c
                    if x < w:
                        break
                    x -= w
            else:
                continue
            break
        k = int(random() * cnt[s_sel][c_sel])
        if k >= cnt[s_sel][c_sel]:
            k = cnt[s_sel][c_sel] - 1
        s = s_sel
        link = bag_l[s][c_sel][k]

        # apply the flip
        o, cl, bg, ps, cs = occ_l[s], cls_l[s], bag_l[s], pos_l[s], cnt[s]
        p1, p2 = nbr_l[s][link]
        o[p1] ^= 1
        o[p2] ^= 1
        if c_sel == 0:
            nd[s] += 2
        elif c_sel == 2:
            nd[s] -= 2
        hh[s] ^= seam_l[s][link]
        ev[s][c_sel] += 1
        nb = nbr_l[s]
        for stab in (p1, p2):
            for l in stab_l[s][stab]:
                q1, q2 = nb[l]
                newc = o[q1] + o[q2]
                oldc = cl[l]
                if newc != oldc:
                    i = ps[l]
                    moved = bg[oldc][cs[oldc] - 1]
                    bg[oldc][i] = moved
                    ps[moved] = i
                    cs[oldc] -= 1
                    bg[newc][cs[newc]] = l
                    ps[l] = cs[newc]
                    cs[newc] += 1
                    cl[l] = newc
        last_s, last_l, last_c = s, link, c_sel
        n_done += 1
        if stop_on_failure and nd[s] == 0 and hh[s] != 0:
            status, failed = FAILED, s
            break
        if n_done >= max_events:
            status = MAX_EVENTS
            break

    for s in (0, 1):
        occ[s] = occ_l[s]
        cls[s] = cls_l[s]
        for c in range(3):
            bag[s, c] = bag_l[s][c]
        pos[s] = pos_l[s]
        count[s] = cnt[s]
        events[s] = ev[s]
    ndef[:] = nd
    h[:] = hh
    clock[0], clock[1] = t, t_next
    area[0], area[1] = a0, a1
    last[:] = (last_s, last_l, last_c)
    return status, failed
