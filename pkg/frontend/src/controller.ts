import { ScoreClient } from "./client.js"
import { Debouncer } from "./debounce.js"
import { ScoreResponse } from "./types.js"

/** What the controller needs from the page; app.ts binds it to the DOM. */
export interface ScoreView {
    renderScore(response: ScoreResponse): void
    renderError(message: string): void
    clearScore(): void
}

/**
 * Drives the live-scoring loop for the draft being edited.
 *
 * Input is debounced; at most one request is in flight at a time (newer
 * drafts wait in `pending`); a response is rendered only if its sequence
 * number is still the latest, so stale responses never overwrite newer
 * ones. Errors render inline and leave the previous render alone.
 */
export class LiveScoreController {
    private seq = 0
    private inFlight = false
    private pending: string | null = null

    constructor(private readonly client: ScoreClient,
                private readonly view: ScoreView,
                private readonly debouncer: Debouncer = new Debouncer(),
                private readonly onScored?: (text: string, r: ScoreResponse) => void) {}

    onInput(text: string): void {
        if (text.trim() === "") {
            this.debouncer.cancel()
            this.seq++                      // orphan any in-flight response
            this.pending = null
            this.view.clearScore()
            return
        }
        this.debouncer.schedule(() => this.request(text))
    }

    private request(text: string): void {
        if (this.inFlight) {
            this.pending = text
            return
        }
        const mySeq = ++this.seq
        this.inFlight = true
        void this.client.score(text).then(result => {
            this.inFlight = false
            const stale = mySeq !== this.seq || this.pending !== null
            if (this.pending !== null) {
                const next = this.pending
                this.pending = null
                this.request(next)
            }
            if (stale) return
            if (result.ok) {
                this.view.renderScore(result.data)
                this.onScored?.(text, result.data)
            } else {
                this.view.renderError(result.message)
            }
        })
    }
}
