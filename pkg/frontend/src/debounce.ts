export const DEBOUNCE_MS = 300

/** Trailing-edge debouncer: fn runs once the input has been quiet for delayMs. */
export class Debouncer {
    private timer: ReturnType<typeof setTimeout> | null = null

    constructor(private readonly delayMs: number = DEBOUNCE_MS) {}

    schedule(fn: () => void): void {
        this.cancel()
        this.timer = setTimeout(() => {
            this.timer = null
            fn()
        }, this.delayMs)
    }

    cancel(): void {
        if (this.timer !== null) {
            clearTimeout(this.timer)
            this.timer = null
        }
    }
}
