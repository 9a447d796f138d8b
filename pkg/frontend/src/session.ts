import { ScoreResponse } from "./types.js"

export interface HistoryEntry {
    text: string
    probability: number
}

export interface Candidate {
    id: number
    text: string
    last: ScoreResponse | null
    history: HistoryEntry[]     // append-only within a session
}

let nextId = 1

export function newCandidate(text: string): Candidate {
    return { id: nextId++, text, last: null, history: [] }
}

/** Record a scored draft: updates the latest response and appends to history. */
export function recordScore(candidate: Candidate, text: string, response: ScoreResponse): void {
    candidate.text = text
    candidate.last = response
    candidate.history.push({ text, probability: response.probability })
}

/** Candidates ordered by probability descending; unscored drafts sink to the end. */
export function sortByProbability(candidates: readonly Candidate[]): Candidate[] {
    return [...candidates].sort((a, b) => {
        const pa = a.last ? a.last.probability : -1
        const pb = b.last ? b.last.probability : -1
        return pb - pa
    })
}

export function formatProbability(p: number): string {
    return p.toFixed(3)
}

export function exportSession(candidates: readonly Candidate[]): string {
    return JSON.stringify({
        exported_at: new Date().toISOString(),
        candidates: candidates.map(c => ({
            text: c.text,
            probability: c.last ? c.last.probability : null,
            history: c.history,
        })),
    }, null, 2)
}
