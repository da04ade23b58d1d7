#!/usr/bin/env python3
"""Reference CoDel (FIFO) state machine, written independently of the C++
sources, used to produce codel_golden.txt.

Schedule (times in ms, tau = 5, lambda = 100, no queue limit):
  phase 1: packets 1..600 enqueued at t=0, one dequeue every 1 ms from t=1
           until the queue is empty
  phase 2: packet 601 enqueued at t=800, dequeued at t=801 (below target)
  phase 3: packets 602..801 enqueued at t=900, one dequeue every 1 ms from
           t=901 until the queue is empty

Output, one line per packet leaving the queue:
  <t_ns> deliver <id>
  <t_ns> drop <id> <n_drop> <next_drop_ns>
"""
import math
import sys
from collections import deque

MS = 1_000_000
TAU = 5 * MS
LAM = 100 * MS


def spacing(n):
    return round(LAM / math.sqrt(n))


class CoDel:
    def __init__(self):
        self.q = deque()
        self.dropping = False
        self.n = 1
        self.next = 0
        self.first_above = None

    def dequeue(self, now, log):
        while self.q:
            pid, enq = self.q.popleft()
            d = now - enq
            if d < TAU:
                self.dropping, self.n, self.first_above = False, 1, None
                log.append(f"{now} deliver {pid}")
                return
            if d == TAU:
                log.append(f"{now} deliver {pid}")
                return
            if not self.dropping:
                if self.first_above is None:
                    self.first_above = now
                elif now - self.first_above >= LAM:
                    self.dropping, self.n = True, 1
                    self.next = now + spacing(1)
                    log.append(f"{now} drop {pid} {self.n} {self.next}")
                    continue
                log.append(f"{now} deliver {pid}")
                return
            if now >= self.next:
                self.n += 1
                self.next += spacing(self.n)
                log.append(f"{now} drop {pid} {self.n} {self.next}")
                continue
            log.append(f"{now} deliver {pid}")
            return


def main():
    c = CoDel()
    log = []
    for pid in range(1, 601):
        c.q.append((pid, 0))
    t = 1 * MS
    while c.q:
        c.dequeue(t, log)
        t += MS
    c.q.append((601, 800 * MS))
    c.dequeue(801 * MS, log)
    for pid in range(602, 802):
        c.q.append((pid, 900 * MS))
    t = 901 * MS
    while c.q:
        c.dequeue(t, log)
        t += MS
    sys.stdout.write("\n".join(log) + "\n")


if __name__ == "__main__":
    main()
