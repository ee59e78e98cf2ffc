"""Reference universal monotone machine: a tiny binary bytecode VM.

A program is read left to right from a one-way binary tape.  It starts
with a *code section*, a sequence of prefix-coded instructions terminated
by ``END``; everything after ``END`` is data, consumed only by the two
input instructions.  Nothing is executed before ``END`` has been read.

======================  =========  ==========================================
bits                    mnemonic   effect (one step per executed instruction)
======================  =========  ==========================================
``000``                 emit0      write 0 to the output tape
``001``                 emit1      write 1 to the output tape
``010``                 halt       stop; the only way to reach status *halted*
``011``                 end        end of code section (not executable)
``100``                 echo       read one data bit, write it
``101``                 branch     read one data bit; if it is 1 skip the
                                   next instruction
``110 0^(k-1) 1``       jmp k      jump back k instructions (clamped at 0)
``111 0^j 1``           rep j      execute the next instruction 2^j times
                                   (only emit/echo repeat; else ignored)
======================  =========  ==========================================

Falling off the end of the code leaves the machine idle forever: no more
output, no more input, never halting.  Output alphabet is binary.

The machine is monotone by construction: input is read lazily and only
forwards, output is append-only, and a run that stopped because it wanted
bit ``len(p)`` is the exact prefix of every run on an extension of ``p``.

Examples (bits shown grouped by instruction)::

    000 110 1 011            0^infinity           (emit0; jmp 1; end)
    100 110 1 011 <x>        echoes the data x
    000 010 011              "0", then halts
    111 0001 000 010 011     "0"*8, then halts
"""
import numpy as np

from ._jit import njit

EMIT0, EMIT1, HALT, END, ECHO, BRANCH, JMP, REP = range(8)

NEEDS_INPUT, HALTED, BUDGET, CAPPED = 0, 1, 2, 3

MNEMONICS = {
    "emit0": EMIT0,
    "emit1": EMIT1,
    "halt": HALT,
    "end": END,
    "echo": ECHO,
    "branch": BRANCH,
    "jmp": JMP,
    "rep": REP,
}
_NAMES = {v: k for k, v in MNEMONICS.items()}

MAX_KEY_BITS = 62


def assemble(source):
    """Assemble ``"emit0; jmp 1; end"`` into a bit string.

    Data bits may follow as a literal token of 0/1 characters prefixed
    with ``@``, e.g. ``"echo; jmp 1; end; @0110"``.
    """
    out = []
    for raw in source.replace("\n", ";").split(";"):
        tok = raw.strip().split()
        if not tok:
            continue
        name = tok[0].lower()
        if name.startswith("@"):
            out.append(name[1:])
            continue
        if name not in MNEMONICS:
            raise ValueError(f"unknown mnemonic {name!r}")
        op = MNEMONICS[name]
        out.append(format(op, "03b"))
        if op == JMP:
            k = int(tok[1])
            if k < 1:
                raise ValueError("jmp needs k >= 1")
            out.append("0" * (k - 1) + "1")
        elif op == REP:
            j = int(tok[1])
            if j < 0:
                raise ValueError("rep needs j >= 0")
            out.append("0" * j + "1")
        elif len(tok) > 1:
            raise ValueError(f"{name} takes no argument")
    return "".join(out)


def disassemble(bits):
    """Inverse of :func:`assemble` for the code section; data shown as ``@...``."""
    i, parts = 0, []
    while i + 3 <= len(bits):
        op = int(bits[i:i + 3], 2)
        i += 3
        if op in (JMP, REP):
            j = bits.find("1", i)
            if j < 0:
                parts.append(_NAMES[op] + " ?")
                return "; ".join(parts)
            n = j - i
            parts.append(f"{_NAMES[op]} {n + 1 if op == JMP else n}")
            i = j + 1
        else:
            parts.append(_NAMES[op])
        if op == END:
            break
    if i < len(bits):
        parts.append("@" + bits[i:])
    return "; ".join(parts)


@njit
def vm_run(prog, plen, max_steps, out, cap, target, tlen):
    """Run the VM on ``prog[:plen]``.

    Returns ``(status, consumed, steps, outlen)``.  Output goes to ``out``
    (size >= cap + 1).  The run stops early with status CAPPED once the
    output exceeds ``cap`` symbols or, when ``tlen >= 0``, disagrees with
    ``target`` or outgrows it.
    """
    ops = np.empty(plen + 1, np.int64)
    args = np.empty(plen + 1, np.int64)
    n = 0
    pos = 0
    while True:
        if pos + 3 > plen:
            return NEEDS_INPUT, plen, 0, 0
        op = prog[pos] * 4 + prog[pos + 1] * 2 + prog[pos + 2]
        pos += 3
        if op == END:
            break
        arg = 0
        if op == JMP or op == REP:
            while True:
                if pos >= plen:
                    return NEEDS_INPUT, plen, 0, 0
                bit = prog[pos]
                pos += 1
                if bit == 1:
                    break
                arg += 1
            if op == JMP:
                arg += 1
        ops[n] = op
        args[n] = arg
        n += 1

    head = pos
    steps = 0
    outlen = 0
    idx = 0
    pending = 1
    while steps < max_steps:
        if idx >= n:
            return BUDGET, head, max_steps, outlen
        op = ops[idx]
        if op == REP:
            j = args[idx]
            if j > MAX_KEY_BITS:
                j = MAX_KEY_BITS
            pending = 1 << j
            idx += 1
            steps += 1
            continue
        if op == EMIT0 or op == EMIT1 or op == ECHO:
            count = pending
            pending = 1
            while count > 0:
                if steps >= max_steps:
                    return BUDGET, head, steps, outlen
                if op == ECHO:
                    if head >= plen:
                        return NEEDS_INPUT, plen, steps, outlen
                    sym = prog[head]
                    head += 1
                else:
                    sym = op
                out[outlen] = sym
                outlen += 1
                steps += 1
                count -= 1
                if outlen > cap:
                    return CAPPED, head, steps, outlen
                if tlen >= 0:
                    if outlen > tlen or sym != target[outlen - 1]:
                        return CAPPED, head, steps, outlen
            idx += 1
            continue
        pending = 1
        steps += 1
        if op == HALT:
            return HALTED, head, steps, outlen
        if op == BRANCH:
            if head >= plen:
                return NEEDS_INPUT, plen, steps - 1, outlen
            bit = prog[head]
            head += 1
            idx += 2 if bit == 1 else 1
        else:  # JMP
            idx = idx - args[idx]
            if idx < 0:
                idx = 0
    return BUDGET, head, steps, outlen


@njit
def _pack(buf, n):
    v = 0
    for i in range(n):
        v = (v << 1) | np.int64(buf[i])
    return v


@njit
def vm_walk(root, max_len, max_steps, cap, target, tlen, root_par):
    """Depth-first walk of all programs extending ``root`` up to ``max_len`` bits.

    A node is expanded only while its run asks for more input.  Only
    *productive* nodes are returned: the subtree root, nodes whose output
    grew relative to their parent (they are minimal for the new prefixes),
    and halting nodes.  Returns ``(plen, parent_outlen, outlen, status,
    outkey, progkey, last, visited)`` where the keys pack the first output
    symbols / program bits MSB-first and ``last`` is the final output
    symbol (-1 when there is none).
    """
    root_len = root.shape[0]
    prog = np.zeros(max_len + 1, np.uint8)
    for i in range(root_len):
        prog[i] = root[i]
    out = np.zeros(cap + 2, np.uint8)

    size = 1024
    r_len = np.empty(size, np.int32)
    r_par = np.empty(size, np.int32)
    r_out = np.empty(size, np.int32)
    r_st = np.empty(size, np.int8)
    r_key = np.empty(size, np.int64)
    r_prog = np.empty(size, np.int64)
    r_last = np.empty(size, np.int8)
    nrec = 0

    depth = 2 * (max_len + 2) + 2
    s_len = np.empty(depth, np.int64)
    s_bit = np.empty(depth, np.int64)
    s_par = np.empty(depth, np.int64)
    sp = 0
    s_len[0] = root_len
    s_bit[0] = -1
    s_par[0] = root_par
    sp = 1
    visited = 0
    while sp > 0:
        sp -= 1
        d = s_len[sp]
        b = s_bit[sp]
        par = s_par[sp]
        if b >= 0:
            prog[d - 1] = b
        status, consumed, steps, outlen = vm_run(prog, d, max_steps, out, cap, target, tlen)
        visited += 1
        if b < 0 or outlen > par or status == HALTED:
            if nrec == size:
                size *= 2
                r_len = _grow32(r_len, size)
                r_par = _grow32(r_par, size)
                r_out = _grow32(r_out, size)
                r_st = _grow8(r_st, size)
                r_key = _grow64(r_key, size)
                r_prog = _grow64(r_prog, size)
                r_last = _grow8(r_last, size)
            r_len[nrec] = d
            r_par[nrec] = par
            r_out[nrec] = outlen
            r_st[nrec] = status
            r_key[nrec] = _pack(out, min(outlen, MAX_KEY_BITS))
            r_prog[nrec] = _pack(prog, min(d, MAX_KEY_BITS))
            r_last[nrec] = out[outlen - 1] if outlen > 0 else -1
            nrec += 1
        if status == NEEDS_INPUT and d < max_len:
            s_len[sp] = d + 1
            s_bit[sp] = 1
            s_par[sp] = outlen
            s_len[sp + 1] = d + 1
            s_bit[sp + 1] = 0
            s_par[sp + 1] = outlen
            sp += 2
    return (r_len[:nrec], r_par[:nrec], r_out[:nrec], r_st[:nrec],
            r_key[:nrec], r_prog[:nrec], r_last[:nrec], visited)


@njit
def _grow32(a, size):
    b = np.empty(size, np.int32)
    b[:a.shape[0]] = a
    return b


@njit
def _grow8(a, size):
    b = np.empty(size, np.int8)
    b[:a.shape[0]] = a
    return b


@njit
def _grow64(a, size):
    b = np.empty(size, np.int64)
    b[:a.shape[0]] = a
    return b
