# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled tick loop.

A line-for-line port of ``engine.step`` and ``agent.fsm_step`` on plain C
structs.  Random numbers come from the very same Philox bit generators the
Python streams wrap, read through numpy's ``bitgen_t`` interface, so both
backends consume identical draws and produce identical logs.
"""

import numpy as np

cimport numpy as cnp
from cpython.pycapsule cimport PyCapsule_GetPointer
from libc.math cimport pow
from libc.stdlib cimport free, malloc
from libc.string cimport memmove
from numpy.random cimport bitgen_t

cnp.import_array()

# Mirrors of the Python enums.
cdef enum:
    GOTO_DIG = 0
    DIGGING = 1
    EXIT_TUNNEL = 2
    GOTO_DUMP = 3
    DUMPING = 4
    EXIT_HOME = 5
    COLLISION = 6
    RESTING = 7
    NO_STATE = -1

cdef enum:
    INBOUND = 0
    OUTBOUND = 1

cdef enum:
    A_NONE = 0
    A_MOVE = 1
    A_SWAP = 2
    A_GRAB = 3
    A_DEPOSIT = 4
    A_TRIP_FAILED = 5
    A_REST_DONE = 6
    A_START_DIG = 7
    A_START_REST = 8

cdef enum:
    R_NONE = 0
    R_PERSIST = 1
    R_GIVE_UP = 2
    R_WAIT = 3
    R_PASS = 4

cdef enum:
    HOME = -1
    DEPOSIT = -2
    REST = -3

cdef enum:
    EV_TRIP_STARTED = 0
    EV_TRIP_ENDED = 1
    EV_CONTACT_STARTED = 2
    EV_CONTACT_RESOLVED = 3
    EV_ESTIMATE_UPDATED = 4
    EV_DEPOSIT_MADE = 5
    EV_TUNNEL_GREW = 6

cdef enum:
    OUT_SUCCESSFUL = 0
    OUT_UNSUCCESSFUL = 1
    OUT_RESTED = 2

cdef enum:
    RES_PASS = 0
    RES_GIVEUP = 1
    RES_CLEAR = 2

cdef enum:
    P_ENTER = 0
    P_REVERSE = 1
    P_NOISE = 2


class KernelViolation(RuntimeError):
    pass


cdef struct Bot:
    int fsm
    int resume
    int pos
    int heading
    int carrying
    long trip_k
    int trip_collisions
    int failed
    int timer
    double p_enter
    double p_reverse
    double l0
    double l_est
    double delta_l
    double last_raw


cdef struct Params:
    int n
    int t_dig
    int t_dump
    int t_rest
    int adaptive
    double alpha
    double eta
    double xi
    double gamma
    double rev_exp
    double ent_exp
    double p_pass
    double p_pass_jam
    double sigma0
    double sigma_c
    double world_l0
    int per_growth
    int growth


cdef struct Event:
    long tick
    int robot
    int kind
    long a
    long b
    double x
    double y


cdef class _Events:
    cdef Event* buf
    cdef Py_ssize_t size, cap

    def __cinit__(self):
        self.cap = 1024
        self.size = 0
        self.buf = <Event*>malloc(self.cap * sizeof(Event))
        if self.buf == NULL:
            raise MemoryError()

    def __dealloc__(self):
        free(self.buf)

    cdef int push(self, long tick, int robot, int kind, long a, long b, double x, double y) except -1:
        cdef Event* grown
        cdef Py_ssize_t i
        if self.size == self.cap:
            grown = <Event*>malloc(2 * self.cap * sizeof(Event))
            if grown == NULL:
                raise MemoryError()
            for i in range(self.size):
                grown[i] = self.buf[i]
            free(self.buf)
            self.buf = grown
            self.cap *= 2
        self.buf[self.size] = Event(tick, robot, kind, a, b, x, y)
        self.size += 1
        return 0


cdef inline double clamp01(double x) nogil:
    if x < 0.0:
        return 0.0
    if x > 1.0:
        return 1.0
    return x


cdef inline int wants_move(Bot* b) nogil:
    cdef int s = b.fsm
    if s == COLLISION:
        s = b.resume
    if s == GOTO_DIG:
        return 0 if b.pos == 0 else -1
    if s == EXIT_TUNNEL or s == GOTO_DUMP:
        return 1 if b.pos >= 0 else 0
    return 0


cdef inline bint inbound_active(Bot* b) nogil:
    if b.fsm == GOTO_DIG:
        return True
    return b.fsm == COLLISION and b.resume == GOTO_DIG


cdef int collide(Bot* b, int resume, int res) except -1:
    if res == R_GIVE_UP:
        if resume != GOTO_DIG:
            raise KernelViolation("gave up while heading out")
        b.fsm = COLLISION
        b.resume = EXIT_TUNNEL
        b.heading = OUTBOUND
        b.failed = 1
        return A_NONE
    if res == R_PASS:
        b.fsm = resume
        b.resume = NO_STATE
        return A_SWAP
    b.fsm = COLLISION
    b.resume = resume
    return A_NONE


cdef int fsm_step(Bot* b, bint at_face, bint at_home, bint blocked, int res, Params* p) except -1:
    """Port of ``agent.fsm_step`` for every state reachable inside a tick."""
    cdef int s = b.fsm
    cdef int resume
    if s == GOTO_DIG:
        if at_home:
            return A_NONE if blocked else A_MOVE
        if at_face:
            b.fsm = DIGGING
            b.timer = p.t_dig
            return A_NONE
        if blocked:
            return collide(b, GOTO_DIG, res)
        return A_MOVE
    if s == DIGGING:
        b.timer -= 1
        if b.timer == 0:
            b.fsm = EXIT_TUNNEL
            b.carrying = 1
            b.heading = OUTBOUND
            return A_GRAB
        return A_NONE
    if s == EXIT_TUNNEL or s == GOTO_DUMP:
        if b.pos == DEPOSIT:
            if s == EXIT_TUNNEL:
                raise KernelViolation("ExitTunnel outside the tunnel")
            b.fsm = DUMPING
            b.timer = p.t_dump
            return A_NONE
        if b.pos < 0:
            raise KernelViolation("heading out from a zone")
        if blocked:
            return collide(b, GOTO_DUMP, res)
        b.fsm = GOTO_DUMP
        return A_MOVE
    if s == DUMPING:
        b.timer -= 1
        if b.timer == 0:
            b.fsm = EXIT_HOME
            b.heading = INBOUND
            if b.carrying:
                b.carrying = 0
                return A_DEPOSIT
            return A_TRIP_FAILED
        return A_NONE
    if s == RESTING:
        if b.pos != REST:
            raise KernelViolation("resting outside the rest zone")
        b.timer -= 1
        if b.timer == 0:
            b.fsm = EXIT_HOME
            return A_REST_DONE
        return A_NONE
    if s == COLLISION:
        if b.pos < 0:
            raise KernelViolation("Collision outside the tunnel")
        resume = b.resume
        if resume == EXIT_TUNNEL:
            resume = GOTO_DUMP
        if not blocked:
            b.fsm = resume
            b.resume = NO_STATE
            return A_MOVE if wants_move(b) != 0 else A_NONE
        return collide(b, resume, res)
    raise KernelViolation("unexpected state %d" % s)


cdef class _Run:
    cdef Params p
    cdef Bot* bots
    cdef int* cells
    cdef int length
    cdef int cap
    cdef long deposit_count
    cdef long t
    # Contact book, indexed a * n + b with a < b.
    cdef int* c_live
    cdef int* c_blocked
    cdef int* c_other
    cdef long* c_start
    cdef long* c_decided
    cdef int* c_gave_up
    # Per-tick scratch.
    cdef int* acted
    cdef int* reg
    cdef int* swapped
    cdef int* drawn
    cdef int* deposits
    cdef int* order
    cdef int n_deposits
    cdef bitgen_t** gens
    cdef long[::1] counts
    cdef _Events events
    cdef list _keep

    def __cinit__(self, int n, int cap):
        self.bots = <Bot*>malloc(n * sizeof(Bot))
        self.cells = <int*>malloc(cap * sizeof(int))
        self.c_live = <int*>malloc(n * n * sizeof(int))
        self.c_blocked = <int*>malloc(n * n * sizeof(int))
        self.c_other = <int*>malloc(n * n * sizeof(int))
        self.c_start = <long*>malloc(n * n * sizeof(long))
        self.c_decided = <long*>malloc(n * n * sizeof(long))
        self.c_gave_up = <int*>malloc(n * n * sizeof(int))
        self.acted = <int*>malloc(n * sizeof(int))
        self.reg = <int*>malloc(n * n * sizeof(int))
        self.swapped = <int*>malloc(n * n * sizeof(int))
        self.drawn = <int*>malloc(n * n * sizeof(int))
        self.deposits = <int*>malloc(n * sizeof(int))
        self.order = <int*>malloc(n * sizeof(int))
        self.gens = <bitgen_t**>malloc((3 * n + 1) * sizeof(bitgen_t*))
        self.cap = cap

    def __dealloc__(self):
        free(self.bots)
        free(self.cells)
        free(self.c_live)
        free(self.c_blocked)
        free(self.c_other)
        free(self.c_start)
        free(self.c_decided)
        free(self.c_gave_up)
        free(self.acted)
        free(self.reg)
        free(self.swapped)
        free(self.drawn)
        free(self.deposits)
        free(self.order)
        free(self.gens)

    cdef inline double draw(self, int i):
        self.counts[i] += 1
        return self.gens[i].next_double(self.gens[i].state)

    cdef inline int target(self, Bot* b, int d):
        cdef int nxt
        if b.pos == HOME:
            return self.length - 1
        nxt = b.pos + d
        return DEPOSIT if nxt > self.length - 1 else nxt

    cdef bint queued(self):
        cdef int i
        for i in range(self.p.n):
            if self.bots[i].pos == HOME and self.bots[i].fsm == GOTO_DIG:
                return True
        return False

    cdef int run_length(self, int lo, int hi):
        while lo > 0 and self.cells[lo - 1] >= 0:
            lo -= 1
        while hi + 1 < self.length and self.cells[hi + 1] >= 0:
            hi += 1
        return hi - lo + 1 + (1 if hi == self.length - 1 and self.queued() else 0)

    cdef int contact(self, int r, int o) except -1:
        cdef int n = self.p.n
        cdef int a = r if r < o else o
        cdef int b = o if r < o else r
        cdef int k = a * n + b
        cdef Bot* rob = &self.bots[r]
        cdef Bot* oth = &self.bots[o]
        cdef bint head_on, jammed
        cdef int lo, hi, res
        if not self.reg[k]:
            if not self.c_live[k]:
                self.c_live[k] = 1
                self.c_blocked[k] = r
                self.c_other[k] = o
                self.c_start[k] = self.t
                self.c_decided[k] = -1
                self.c_gave_up[k] = 0
                self.events.push(self.t, r, EV_CONTACT_STARTED, o, 0, 0.0, 0.0)
                rob.trip_collisions += 1
                oth.trip_collisions += 1
            self.reg[k] = 1
        head_on = wants_move(oth) == -wants_move(rob) and oth.pos >= 0
        lo = rob.pos if rob.pos < oth.pos else oth.pos
        hi = oth.pos if rob.pos < oth.pos else rob.pos
        jammed = self.run_length(lo, hi) >= 3
        res = R_WAIT
        if inbound_active(rob) and self.c_decided[k] < 0:
            self.c_decided[k] = self.t
            if self.draw(r * 3 + P_REVERSE) < rob.p_reverse:
                self.c_gave_up[k] = 1
                res = R_GIVE_UP
            else:
                res = R_PERSIST
        elif (
            head_on
            and not self.drawn[k]
            and self.c_decided[k] >= 0
            and self.c_decided[k] < self.t
            and not self.c_gave_up[k]
        ):
            if self.draw(3 * n) < (self.p.p_pass_jam if jammed else self.p.p_pass):
                res = R_PASS
        if head_on:
            self.drawn[k] = 1
        if res == R_PASS:
            self.swapped[k] = 1
        return res

    cdef int grab(self, Bot* b, int r) except -1:
        cdef int i
        cdef double value, u
        cdef double l_true = self.length
        u = self.draw(r * 3 + P_NOISE)
        value = l_true + self.p.sigma0 * (2.0 * u - 1.0)
        for i in range(b.trip_collisions):
            u = self.draw(r * 3 + P_NOISE)
            value += self.p.sigma_c * (2.0 * u - 1.0)
        if not value > 0.0:
            value = 0.0
        b.l_est = b.l_est + self.p.gamma * (value - b.l_est)
        b.delta_l = b.l_est - b.l0
        if not b.delta_l > 0.0:
            b.delta_l = 0.0
        b.last_raw = value
        self.events.push(self.t, r, EV_ESTIMATE_UPDATED, 0, 0, value, b.l_est)
        return 0

    cdef int end_trip(self, Bot* b, int r, int outcome) except -1:
        cdef double l0 = self.p.world_l0
        cdef double dl = b.delta_l
        cdef double step
        if self.p.adaptive:
            if outcome == OUT_RESTED:
                b.p_enter = clamp01(b.p_enter + self.p.xi)
            else:
                step = self.p.eta * pow(dl / (l0 + dl), self.p.ent_exp)
                if outcome == OUT_SUCCESSFUL:
                    b.p_enter = clamp01(b.p_enter + step)
                else:
                    b.p_enter = clamp01(b.p_enter - step)
                b.p_reverse = clamp01(self.p.alpha * pow(l0 / (l0 + dl), self.p.rev_exp))
        self.events.push(self.t, r, EV_TRIP_ENDED, outcome, b.trip_k, b.p_enter, b.p_reverse)
        b.trip_k += 1
        b.pos = HOME
        b.failed = 0
        return 0

    cdef int act(self, int r) except -1:
        cdef Bot* b = &self.bots[r]
        cdef int d = wants_move(b)
        cdef int blocker = -1
        cdef int tgt = 0, res = R_NONE, action, old_pos, s, a_pos
        cdef int carrying = b.carrying
        if d != 0:
            tgt = self.target(b, d)
            if tgt >= 0:
                blocker = self.cells[tgt]
        if blocker >= 0 and b.pos >= 0:
            res = self.contact(r, blocker)
        old_pos = b.pos
        action = fsm_step(b, b.pos == 0, b.pos == HOME, blocker >= 0, res, &self.p)
        if action == A_MOVE:
            if old_pos >= 0:
                self.cells[old_pos] = -1
            if tgt >= 0:
                if self.cells[tgt] >= 0:
                    raise KernelViolation("robot %d moved into occupied cell %d" % (r, tgt))
                self.cells[tgt] = r
            b.pos = tgt
        elif action == A_SWAP:
            s = blocker
            if fsm_step(&self.bots[s], False, False, True, R_PASS, &self.p) != A_SWAP:
                raise KernelViolation("robot %d refused a pass with robot %d" % (s, r))
            a_pos = b.pos
            self.cells[a_pos] = s
            self.cells[self.bots[s].pos] = r
            b.pos = self.bots[s].pos
            self.bots[s].pos = a_pos
            self.acted[s] = 1
        elif action == A_GRAB:
            self.grab(b, r)
        elif action == A_DEPOSIT:
            if not carrying:
                raise KernelViolation("robot %d deposited without carrying pellets" % r)
            self.deposits[self.n_deposits] = r
            self.n_deposits += 1
            self.end_trip(b, r, OUT_SUCCESSFUL)
        elif action == A_TRIP_FAILED:
            self.end_trip(b, r, OUT_UNSUCCESSFUL)
        elif action == A_REST_DONE:
            self.end_trip(b, r, OUT_RESTED)
        self.acted[r] = 1
        return 0

    cdef int tick(self, cnp.int8_t[:, ::1] st, cnp.int32_t[:, ::1] ps,
                  cnp.int8_t[:, ::1] hd, cnp.uint8_t[:, ::1] ct, Py_ssize_t row) except -1:
        cdef int n = self.p.n
        cdef int r, i, j, tmp, a, b, k, how
        cdef Bot* bot
        for r in range(n):
            bot = &self.bots[r]
            if bot.fsm == EXIT_HOME:
                if self.draw(r * 3 + P_ENTER) < bot.p_enter:
                    bot.fsm = GOTO_DIG
                    bot.heading = INBOUND
                    bot.trip_collisions = 0
                    bot.failed = 0
                    self.events.push(self.t, r, EV_TRIP_STARTED, 0, 0, 0.0, 0.0)
                else:
                    bot.fsm = RESTING
                    bot.timer = self.p.t_rest
                    bot.trip_collisions = 0
                    bot.failed = 0
                    bot.pos = REST
                    self.events.push(self.t, r, EV_TRIP_STARTED, 1, 0, 0.0, 0.0)

        for i in range(n):
            self.order[i] = i
            self.acted[i] = 0
            self.deposits[i] = -1
        for k in range(n * n):
            self.reg[k] = 0
            self.swapped[k] = 0
            self.drawn[k] = 0
        self.n_deposits = 0
        for i in range(n - 1, 0, -1):
            j = <int>(self.draw(3 * n) * (i + 1))
            tmp = self.order[i]
            self.order[i] = self.order[j]
            self.order[j] = tmp
        for i in range(n):
            if not self.acted[self.order[i]]:
                self.act(self.order[i])

        for a in range(n):
            for b in range(a + 1, n):
                k = a * n + b
                if (self.c_live[k] and not self.reg[k]) or self.swapped[k]:
                    if self.swapped[k]:
                        how = RES_PASS
                    elif self.c_gave_up[k]:
                        how = RES_GIVEUP
                    else:
                        how = RES_CLEAR
                    self.events.push(self.t, self.c_blocked[k], EV_CONTACT_RESOLVED, self.c_other[k], how, 0.0, 0.0)
                    self.c_live[k] = 0
        for r in range(n):
            ct[row, r] = 0
        for a in range(n):
            for b in range(a + 1, n):
                k = a * n + b
                if self.reg[k]:
                    ct[row, a] = 1
                    ct[row, b] = 1
                    if not self.swapped[k]:
                        self.c_live[k] = 1

        for i in range(self.n_deposits):
            r = self.deposits[i]
            self.deposit_count += 1
            self.events.push(self.t, r, EV_DEPOSIT_MADE, self.deposit_count, 0, 0.0, 0.0)
            if self.p.growth and self.deposit_count % self.p.per_growth == 0:
                if self.length + 1 > self.cap:
                    raise KernelViolation("tunnel capacity exceeded")
                memmove(&self.cells[1], &self.cells[0], self.length * sizeof(int))
                self.cells[0] = -1
                self.length += 1
                for j in range(n):
                    if self.bots[j].pos >= 0:
                        self.bots[j].pos += 1
                self.events.push(self.t, r, EV_TUNNEL_GREW, self.length, 0, 0.0, 0.0)

        for r in range(n):
            st[row, r] = self.bots[r].fsm
            ps[row, r] = self.bots[r].pos
            hd[row, r] = self.bots[r].heading
        self.t += 1
        return 0


_BOT_INT = ("fsm", "resume", "pos", "heading", "carrying", "trip_k", "trip_collisions", "failed", "timer")
_BOT_FLOAT = ("p_enter", "p_reverse", "l0", "l_est", "delta_l", "last_raw")


def advance(dict params, dict bots, cnp.int32_t[::1] cells, long deposit_count, long t0,
            dict contacts, list capsules, long[::1] counts, long ticks):
    """Run ``ticks`` ticks.

    ``bots`` maps field names to per-robot arrays and ``contacts`` holds the
    open contact book as ``[n, n]`` arrays; both are updated in place.
    Returns the sample arrays, the event records and the world tally.
    """
    cdef int n = params["n"]
    cdef int cap = cells.shape[0]
    cdef _Run run = _Run(n, cap)
    cdef int i, r
    cdef Py_ssize_t row
    cdef bitgen_t* bg
    run.p.n = n
    run.p.t_dig = params["t_dig"]
    run.p.t_dump = params["t_dump"]
    run.p.t_rest = params["t_rest"]
    run.p.adaptive = params["adaptive"]
    run.p.alpha = params["alpha"]
    run.p.eta = params["eta"]
    run.p.xi = params["xi"]
    run.p.gamma = params["gamma"]
    run.p.rev_exp = params["rev_exponent"]
    run.p.ent_exp = params["ent_exponent"]
    run.p.p_pass = params["p_pass"]
    run.p.p_pass_jam = params["p_pass_jam"]
    run.p.sigma0 = params["sigma0"]
    run.p.sigma_c = params["sigma_c"]
    run.p.world_l0 = params["world_l0"]
    run.p.per_growth = params["per_growth"]
    run.p.growth = params["growth"]
    run.length = params["length"]
    run.deposit_count = deposit_count
    run.t = t0
    run.counts = counts
    run.events = _Events()
    run._keep = capsules
    for i in range(len(capsules)):
        bg = <bitgen_t*>PyCapsule_GetPointer(capsules[i], "BitGenerator")
        run.gens[i] = bg
    for i in range(cap):
        run.cells[i] = cells[i]

    cdef long[::1] ival
    cdef double[::1] fval
    for name in _BOT_INT:
        ival = bots[name]
        for r in range(n):
            if name == "fsm": run.bots[r].fsm = ival[r]
            elif name == "resume": run.bots[r].resume = ival[r]
            elif name == "pos": run.bots[r].pos = ival[r]
            elif name == "heading": run.bots[r].heading = ival[r]
            elif name == "carrying": run.bots[r].carrying = ival[r]
            elif name == "trip_k": run.bots[r].trip_k = ival[r]
            elif name == "trip_collisions": run.bots[r].trip_collisions = ival[r]
            elif name == "failed": run.bots[r].failed = ival[r]
            else: run.bots[r].timer = ival[r]
    for name in _BOT_FLOAT:
        fval = bots[name]
        for r in range(n):
            if name == "p_enter": run.bots[r].p_enter = fval[r]
            elif name == "p_reverse": run.bots[r].p_reverse = fval[r]
            elif name == "l0": run.bots[r].l0 = fval[r]
            elif name == "l_est": run.bots[r].l_est = fval[r]
            elif name == "delta_l": run.bots[r].delta_l = fval[r]
            else: run.bots[r].last_raw = fval[r]

    cdef long[:, ::1] cl = contacts["live"]
    cdef long[:, ::1] cb = contacts["blocked"]
    cdef long[:, ::1] co = contacts["other"]
    cdef long[:, ::1] cs = contacts["start"]
    cdef long[:, ::1] cdd = contacts["decided_at"]
    cdef long[:, ::1] cg = contacts["gave_up"]
    cdef int a, b
    for a in range(n):
        for b in range(n):
            run.c_live[a * n + b] = cl[a, b]
            run.c_blocked[a * n + b] = cb[a, b]
            run.c_other[a * n + b] = co[a, b]
            run.c_start[a * n + b] = cs[a, b]
            run.c_decided[a * n + b] = cdd[a, b]
            run.c_gave_up[a * n + b] = cg[a, b]

    state = np.zeros((ticks, n), dtype=np.int8)
    pos = np.zeros((ticks, n), dtype=np.int32)
    heading = np.zeros((ticks, n), dtype=np.int8)
    contact = np.zeros((ticks, n), dtype=np.uint8)
    cdef cnp.int8_t[:, ::1] st = state
    cdef cnp.int32_t[:, ::1] ps = pos
    cdef cnp.int8_t[:, ::1] hd = heading
    cdef cnp.uint8_t[:, ::1] ct = contact
    for row in range(ticks):
        run.tick(st, ps, hd, ct, row)

    for a in range(n):
        for b in range(n):
            cl[a, b] = run.c_live[a * n + b]
            cb[a, b] = run.c_blocked[a * n + b]
            co[a, b] = run.c_other[a * n + b]
            cs[a, b] = run.c_start[a * n + b]
            cdd[a, b] = run.c_decided[a * n + b]
            cg[a, b] = run.c_gave_up[a * n + b]
    for r in range(n):
        bots["fsm"][r] = run.bots[r].fsm
        bots["resume"][r] = run.bots[r].resume
        bots["pos"][r] = run.bots[r].pos
        bots["heading"][r] = run.bots[r].heading
        bots["carrying"][r] = run.bots[r].carrying
        bots["trip_k"][r] = run.bots[r].trip_k
        bots["trip_collisions"][r] = run.bots[r].trip_collisions
        bots["failed"][r] = run.bots[r].failed
        bots["timer"][r] = run.bots[r].timer
        bots["p_enter"][r] = run.bots[r].p_enter
        bots["p_reverse"][r] = run.bots[r].p_reverse
        bots["l0"][r] = run.bots[r].l0
        bots["l_est"][r] = run.bots[r].l_est
        bots["delta_l"][r] = run.bots[r].delta_l
        bots["last_raw"][r] = run.bots[r].last_raw
    for i in range(cap):
        cells[i] = run.cells[i] if i < run.length else -1

    ev = np.empty(run.events.size, dtype=[("tick", "i8"), ("robot", "i4"), ("kind", "i1"),
                                          ("a", "i8"), ("b", "i8"), ("x", "f8"), ("y", "f8")])
    cdef Py_ssize_t e
    for e in range(run.events.size):
        ev[e] = (run.events.buf[e].tick, run.events.buf[e].robot, run.events.buf[e].kind,
                 run.events.buf[e].a, run.events.buf[e].b, run.events.buf[e].x, run.events.buf[e].y)
    return state, pos, heading, contact.view(bool), ev, run.length, run.deposit_count
