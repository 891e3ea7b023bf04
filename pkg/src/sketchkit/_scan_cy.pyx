# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled scanner kernel.

Port of _scan_py.scan with identical observable behavior: same event
tuples, same error reporting, same tolerances. _scan_py holds the
reference semantics; parity tests compare the two on every change.
"""

K_NAME = 0
K_NUMBER = 1
K_STRING = 2
K_OP = 3
K_COMMENT = 4
K_NEWLINE = 5

ERR_UNTERMINATED = 1

DEF _K_NAME = 0
DEF _K_NUMBER = 1
DEF _K_STRING = 2
DEF _K_OP = 3
DEF _K_COMMENT = 4
DEF _K_NEWLINE = 5


cdef inline bint _is_ascii_id_start(Py_UCS4 ch):
    return ch == u'_' or (u'a' <= ch <= u'z') or (u'A' <= ch <= u'Z')


cdef inline bint _is_ascii_id_cont(Py_UCS4 ch):
    return (
        ch == u'_'
        or (u'a' <= ch <= u'z')
        or (u'A' <= ch <= u'Z')
        or (u'0' <= ch <= u'9')
    )


cdef inline bint _is_digit(Py_UCS4 ch):
    return u'0' <= ch <= u'9'


cdef bint _is_uni_id_start(Py_UCS4 ch):
    return chr(ch).isidentifier()


cdef bint _is_uni_id_cont(Py_UCS4 ch):
    return (u'a' + chr(ch)).isidentifier()


cdef Py_ssize_t _scan_name_end(str source, Py_ssize_t i, Py_ssize_t n):
    cdef Py_ssize_t j = i + 1
    cdef Py_UCS4 c
    while j < n:
        c = source[j]
        if _is_ascii_id_cont(c):
            j += 1
        elif c > 127 and _is_uni_id_cont(c):
            j += 1
        else:
            break
    return j


cdef Py_ssize_t _scan_digits(str source, Py_ssize_t i, Py_ssize_t n):
    """Consume [0-9](_?[0-9])* starting at a digit; returns end index."""
    cdef Py_ssize_t j = i + 1
    while j < n:
        if _is_digit(source[j]):
            j += 1
        elif source[j] == u'_' and j + 1 < n and _is_digit(source[j + 1]):
            j += 2
        else:
            break
    return j


cdef inline bint _radix_digit(Py_UCS4 c, int base):
    if base == 16:
        return _is_digit(c) or (u'a' <= c <= u'f') or (u'A' <= c <= u'F')
    if base == 8:
        return u'0' <= c <= u'7'
    return c == u'0' or c == u'1'


cdef Py_ssize_t _scan_radix(str source, Py_ssize_t i, Py_ssize_t n, int base):
    """Consume (_?digit)+ for the base; returns end index or -1 if no digit."""
    cdef Py_ssize_t j = i
    cdef bint matched = False
    while j < n:
        if _radix_digit(source[j], base):
            j += 1
            matched = True
        elif (
            source[j] == u'_'
            and j + 1 < n
            and _radix_digit(source[j + 1], base)
        ):
            j += 2
            matched = True
        else:
            break
    return j if matched else -1


cdef Py_ssize_t _scan_number(str source, Py_ssize_t i, Py_ssize_t n):
    """End of the number starting at i. Caller checked: digit, or '.'
    followed by a digit."""
    cdef Py_UCS4 c = source[i]
    cdef Py_UCS4 d
    cdef Py_ssize_t j, k

    if c == u'0' and i + 1 < n:
        d = source[i + 1]
        if d == u'x' or d == u'X':
            j = _scan_radix(source, i + 2, n, 16)
            if j != -1:
                return j
        elif d == u'b' or d == u'B':
            j = _scan_radix(source, i + 2, n, 2)
            if j != -1:
                return j
        elif d == u'o' or d == u'O':
            j = _scan_radix(source, i + 2, n, 8)
            if j != -1:
                return j

    if c == u'.':
        j = _scan_digits(source, i + 1, n)  # caller guaranteed the digit
    else:
        j = _scan_digits(source, i, n)
        if j < n and source[j] == u'.':
            j += 1
            if j < n and _is_digit(source[j]):
                j = _scan_digits(source, j, n)

    if j < n and (source[j] == u'e' or source[j] == u'E'):
        k = j + 1
        if k < n and (source[k] == u'+' or source[k] == u'-'):
            k += 1
        if k < n and _is_digit(source[k]):
            j = _scan_digits(source, k, n)

    if j < n and (source[j] == u'j' or source[j] == u'J'):
        j += 1
    return j


cdef tuple _scan_string(str source, Py_ssize_t qpos):
    """(end, newlines, last_nl_pos); end == -1 means unterminated."""
    cdef Py_ssize_t n = len(source)
    cdef Py_UCS4 q = source[qpos]
    cdef Py_ssize_t j, k, b, end
    cdef Py_ssize_t nb
    cdef Py_UCS4 c
    cdef str terminator
    cdef Py_ssize_t newlines, last_nl

    end = -1
    if (
        qpos + 2 < n
        and source[qpos + 1] == q
        and source[qpos + 2] == q
    ):
        terminator = source[qpos : qpos + 3]
        j = qpos + 3
        while True:
            k = source.find(terminator, j)
            if k == -1:
                return (-1, 0, -1)
            b = k - 1
            nb = 0
            while b >= j and source[b] == u'\\':
                nb += 1
                b -= 1
            if nb % 2:
                j = k + 1
                continue
            end = k + 3
            break
    else:
        j = qpos + 1
        while j < n:
            c = source[j]
            if c == u'\\':
                if j + 1 >= n:
                    return (-1, 0, -1)
                if source[j + 1] == u'\r' and j + 2 < n and source[j + 2] == u'\n':
                    j += 3
                else:
                    j += 2
                continue
            if c == q:
                end = j + 1
                break
            if c == u'\n' or c == u'\r':
                return (-1, 0, -1)
            j += 1
        if end == -1:
            return (-1, 0, -1)

    newlines = (
        source.count(u'\n', qpos, end)
        + source.count(u'\r', qpos, end)
        - source.count(u'\r\n', qpos, end)
    )
    last_nl = -1
    if newlines:
        k = source.rfind(u'\n', qpos, end)
        b = source.rfind(u'\r', qpos, end)
        last_nl = k if k > b else b
    return (end, newlines, last_nl)


cdef inline int _op_len(str source, Py_ssize_t i, Py_ssize_t n):
    cdef Py_UCS4 a = source[i]
    cdef Py_UCS4 b = source[i + 1] if i + 1 < n else 0
    cdef Py_UCS4 c = source[i + 2] if i + 2 < n else 0
    if a == u'*' or a == u'/' or a == u'>' or a == u'<':
        if b == a:
            return 3 if c == u'=' else 2
        return 2 if b == u'=' else 1
    if a == u'.':
        return 3 if (b == u'.' and c == u'.') else 1
    if a == u'-':
        return 2 if (b == u'=' or b == u'>') else 1
    if (
        a == u'=' or a == u'!' or a == u'+' or a == u'%'
        or a == u'&' or a == u'|' or a == u'^' or a == u'@'
        or a == u':'
    ):
        return 2 if b == u'=' else 1
    return 1


cdef bint _is_string_prefix(str text):
    cdef str low = text.lower()
    return low in ("r", "b", "u", "f", "rb", "br", "fr", "rf")


def scan(str source):
    """Scan source into (events, error); error is None or (code, line, col)."""
    cdef list events = []
    cdef Py_ssize_t n = len(source)
    cdef Py_ssize_t i = 0
    cdef Py_ssize_t line = 1
    cdef Py_ssize_t line_start = 0
    cdef Py_ssize_t depth = 0
    cdef bint line_has_token = False
    cdef Py_UCS4 ch
    cdef Py_ssize_t j, k, col, end
    cdef Py_ssize_t newlines, last_nl
    cdef tuple st
    cdef int oplen

    while i < n:
        ch = source[i]

        if ch == u' ' or ch == u'\t' or ch == u'\f' or ch == 0xFEFF:
            i += 1
            continue

        if ch == u'\n' or ch == u'\r':
            j = i + 1
            if ch == u'\r' and j < n and source[j] == u'\n':
                j += 1
            if depth == 0 and line_has_token:
                events.append((_K_NEWLINE, i, j, line, i - line_start))
                line_has_token = False
            line += 1
            line_start = j
            i = j
            continue

        if ch == u'\\':
            j = i + 1
            if j < n and (source[j] == u'\n' or source[j] == u'\r'):
                k = j + 1
                if source[j] == u'\r' and k < n and source[k] == u'\n':
                    k += 1
                line += 1
                line_start = k
                i = k
                continue
            events.append((_K_OP, i, i + 1, line, i - line_start))
            line_has_token = True
            i += 1
            continue

        if ch == u'#':
            j = i + 1
            while j < n and source[j] != u'\n' and source[j] != u'\r':
                j += 1
            events.append((_K_COMMENT, i, j, line, i - line_start))
            i = j
            continue

        col = i - line_start

        if _is_ascii_id_start(ch) or (ch > 127 and _is_uni_id_start(ch)):
            j = _scan_name_end(source, i, n)
            if (
                j - i <= 2
                and j < n
                and (source[j] == u'"' or source[j] == u"'")
                and _is_string_prefix(source[i:j])
            ):
                st = _scan_string(source, j)
                end = st[0]
                if end == -1:
                    return events, (ERR_UNTERMINATED, line, col)
                events.append((_K_STRING, i, end, line, col))
                newlines = st[1]
                if newlines:
                    line += newlines
                    line_start = st[2] + 1
                line_has_token = True
                i = end
                continue
            events.append((_K_NAME, i, j, line, col))
            line_has_token = True
            i = j
            continue

        if ch == u'"' or ch == u"'":
            st = _scan_string(source, i)
            end = st[0]
            if end == -1:
                return events, (ERR_UNTERMINATED, line, col)
            events.append((_K_STRING, i, end, line, col))
            newlines = st[1]
            if newlines:
                line += newlines
                line_start = st[2] + 1
            line_has_token = True
            i = end
            continue

        if _is_digit(ch) or (
            ch == u'.' and i + 1 < n and _is_digit(source[i + 1])
        ):
            j = _scan_number(source, i, n)
            events.append((_K_NUMBER, i, j, line, col))
            line_has_token = True
            i = j
            continue

        oplen = _op_len(source, i, n)
        j = i + oplen
        if oplen == 1:
            if ch == u'(' or ch == u'[' or ch == u'{':
                depth += 1
            elif (ch == u')' or ch == u']' or ch == u'}') and depth > 0:
                depth -= 1
        events.append((_K_OP, i, j, line, col))
        line_has_token = True
        i = j

    if line_has_token:
        events.append((_K_NEWLINE, n, n, line, n - line_start))
    return events, None
