import { ScoreResponse, ScoreResult } from "./types.js"

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>

/** Thin client for the scoring service; all numbers come from the wire. */
export class ScoreClient {
    constructor(private readonly baseUrl: string,
                private readonly fetchFn: FetchLike = fetch.bind(globalThis)) {}

    async score(title: string): Promise<ScoreResult> {
        let response: Response
        try {
            response = await this.fetchFn(`${this.baseUrl}/score`, {
                method: "POST",
                headers: { "content-type": "application/json" },
                body: JSON.stringify({ title }),
            })
        } catch (err) {
            return { ok: false, status: 0, message: `service unreachable: ${err}` }
        }
        if (!response.ok) {
            let message = `service error ${response.status}`
            try {
                const body = await response.json()
                if (body && typeof body.error === "string") message = body.error
            } catch {
                // keep the generic message
            }
            return { ok: false, status: response.status, message }
        }
        return { ok: true, data: (await response.json()) as ScoreResponse }
    }
}
