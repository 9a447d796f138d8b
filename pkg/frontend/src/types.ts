// Wire types of the scoring service, mirrored verbatim.

export interface TokenScore {
    token: string
    contribution: number
}

export interface ModelInfo {
    kind: string
    H: number
    d: number
    version: number
}

export interface ScoreResponse {
    probability: number
    label: "popular" | "unpopular"
    tokens: TokenScore[]
    model_info: ModelInfo
}

export type ScoreResult =
    | { ok: true; data: ScoreResponse }
    | { ok: false; status: number; message: string }
