import { ScoreResponse } from "../src/types.js"

// Known outputs of a zero-head model: probability 0.5, every contribution 0.5.
export function zeroHeadResponse(title: string): ScoreResponse {
    return {
        probability: 0.5,
        label: "unpopular",
        tokens: title.trim().split(/\s+/).map(token => ({
            token: token.toLowerCase(),
            contribution: 0.5,
        })),
        model_info: { kind: "bilstm", H: 4, d: 3, version: 1 },
    }
}

export function jsonResponse(status: number, body: unknown): Response {
    return new Response(JSON.stringify(body), {
        status,
        headers: { "content-type": "application/json" },
    })
}
