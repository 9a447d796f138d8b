import { ScoreClient } from "./client.js"
import { LiveScoreController, ScoreView } from "./controller.js"
import { contributionColor } from "./heatmap.js"
import { Candidate, exportSession, formatProbability, newCandidate, recordScore,
         sortByProbability } from "./session.js"
import { ScoreResponse } from "./types.js"

function serviceUrl(): string {
    const param = new URLSearchParams(window.location.search).get("service")
    return (param ?? "http://127.0.0.1:8010").replace(/\/$/, "")
}

const candidates: Candidate[] = []
let active: Candidate = newCandidate("")
candidates.push(active)

const input = document.getElementById("draft") as HTMLTextAreaElement
const gaugeValue = document.getElementById("gauge-value") as HTMLElement
const gaugeFill = document.getElementById("gauge-fill") as HTMLElement
const gaugeLabel = document.getElementById("gauge-label") as HTMLElement
const heatmap = document.getElementById("heatmap") as HTMLElement
const errorLine = document.getElementById("error-line") as HTMLElement
const compareBody = document.getElementById("compare-body") as HTMLElement
const serviceLine = document.getElementById("service-line") as HTMLElement

const view: ScoreView = {
    renderScore(response: ScoreResponse): void {
        errorLine.textContent = ""
        gaugeValue.textContent = formatProbability(response.probability)
        gaugeLabel.textContent = response.label
        gaugeFill.style.width = `${Math.round(response.probability * 100)}%`
        heatmap.replaceChildren(...response.tokens.map(t => {
            const span = document.createElement("span")
            span.className = "tok"
            span.textContent = t.token
            span.style.backgroundColor = contributionColor(t.contribution)
            span.title = formatProbability(t.contribution)
            return span
        }))
        renderCompare()
    },
    renderError(message: string): void {
        errorLine.textContent = message            // prior gauge/heatmap stay put
    },
    clearScore(): void {
        errorLine.textContent = ""
        gaugeValue.textContent = "–"
        gaugeLabel.textContent = ""
        gaugeFill.style.width = "0"
        heatmap.replaceChildren()
    },
}

const client = new ScoreClient(serviceUrl())
const controller = new LiveScoreController(client, view, undefined,
    (text, response) => recordScore(active, text, response))

function renderCompare(): void {
    compareBody.replaceChildren(...sortByProbability(candidates).map(c => {
        const row = document.createElement("tr")
        if (c === active) row.className = "active"
        const prob = document.createElement("td")
        prob.textContent = c.last ? formatProbability(c.last.probability) : "–"
        const text = document.createElement("td")
        text.textContent = c.text || "(empty)"
        row.append(prob, text)
        row.addEventListener("click", () => {
            active = c
            input.value = c.text
            controller.onInput(c.text)
            renderCompare()
        })
        return row
    }))
}

input.addEventListener("input", () => controller.onInput(input.value))

document.getElementById("new-candidate")!.addEventListener("click", () => {
    active = newCandidate("")
    candidates.push(active)
    input.value = ""
    view.clearScore()
    renderCompare()
    input.focus()
})

document.getElementById("export")!.addEventListener("click", () => {
    const blob = new Blob([exportSession(candidates)], { type: "application/json" })
    const link = document.createElement("a")
    link.href = URL.createObjectURL(blob)
    link.download = "headline-session.json"
    link.click()
    URL.revokeObjectURL(link.href)
})

serviceLine.textContent = `service: ${serviceUrl()}`
renderCompare()
