import { afterEach, beforeEach, describe, expect, it, vi } from "vitest"

import { Debouncer } from "../src/debounce.js"

describe("Debouncer", () => {
    beforeEach(() => vi.useFakeTimers())
    afterEach(() => vi.useRealTimers())

    it("fires once, 300ms after the last schedule", () => {
        const fn = vi.fn()
        const d = new Debouncer(300)
        d.schedule(fn)
        vi.advanceTimersByTime(200)
        d.schedule(fn)
        vi.advanceTimersByTime(299)
        expect(fn).not.toHaveBeenCalled()
        vi.advanceTimersByTime(1)
        expect(fn).toHaveBeenCalledTimes(1)
    })

    it("cancel suppresses the pending call", () => {
        const fn = vi.fn()
        const d = new Debouncer(300)
        d.schedule(fn)
        d.cancel()
        vi.advanceTimersByTime(1000)
        expect(fn).not.toHaveBeenCalled()
    })

    it("later schedules replace earlier ones", () => {
        const calls: string[] = []
        const d = new Debouncer(300)
        d.schedule(() => calls.push("first"))
        d.schedule(() => calls.push("second"))
        vi.advanceTimersByTime(300)
        expect(calls).toEqual(["second"])
    })
})
