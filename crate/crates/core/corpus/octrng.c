/* octrng(4) driver model: device registers, timer and task queue are plain
 * memory so the driver can be translated as one unit. */

static const unsigned int MAX_QUEUE = 8;

static const unsigned long OCTRNG_CONTROL_ADDR = 0x0001180040000000UL;
static const unsigned long OCTRNG_ENTROPY_REG = 0;
static const unsigned int OCTRNG_ENABLE_OUTPUT = 1 << 1;
static const unsigned int OCTRNG_ENABLE_ENTROPY = 1 << 0;

struct octrng_regs {
    unsigned long control_addr;
};

struct task {
    unsigned int timeout;
    unsigned int start;
    void (*timeout_fun)(void);
};

static struct octrng_regs rng_regs;
static unsigned int timer;
static int rand_value;

static struct task tasks[MAX_QUEUE];
static unsigned int running_tasks;
static unsigned int current_tasks;

int add_task(void (*fun)(void), unsigned int timeout)
{
    int result;

    if (running_tasks >= MAX_QUEUE) {
        result = -1;
    } else {
        tasks[current_tasks % MAX_QUEUE].timeout = timeout;
        tasks[current_tasks % MAX_QUEUE].start = timer;
        tasks[current_tasks % MAX_QUEUE].timeout_fun = fun;
        current_tasks = (current_tasks + 1) % MAX_QUEUE;
        running_tasks++;
        result = 0;
    }
    return result;
}

unsigned int get_register(unsigned long addr)
{
    unsigned int value;

    if (addr == OCTRNG_CONTROL_ADDR) {
        value = (unsigned int)rng_regs.control_addr;
    } else if (addr == OCTRNG_ENTROPY_REG
               && (rng_regs.control_addr & OCTRNG_ENABLE_OUTPUT) != 0
               && (rng_regs.control_addr & OCTRNG_ENABLE_ENTROPY) != 0) {
        /* no entropy source: the timer stands in for the random value */
        value = timer;
    } else {
        value = 0;
    }
    return value;
}

void set_register(unsigned long addr, unsigned long value)
{
    if (addr == OCTRNG_CONTROL_ADDR) {
        rng_regs.control_addr = value;
    }
}

void octrng_rnd(void);

/*@ requires true;
    ensures (rng_regs.control_addr & OCTRNG_ENABLE_OUTPUT) != 0;
    ensures (rng_regs.control_addr & OCTRNG_ENABLE_ENTROPY) != 0; @*/
void octrng_attach(void)
{
    unsigned long control_reg;

    control_reg = get_register(OCTRNG_CONTROL_ADDR);
    control_reg |= OCTRNG_ENABLE_OUTPUT;
    control_reg |= OCTRNG_ENABLE_ENTROPY;
    set_register(OCTRNG_CONTROL_ADDR, control_reg);

    add_task(octrng_rnd, 5);
}

/*@ total;
    requires timer == a;
    requires running_tasks < MAX_QUEUE;
    requires current_tasks < MAX_QUEUE;
    requires (rng_regs.control_addr & OCTRNG_ENABLE_OUTPUT) != 0;
    requires (rng_regs.control_addr & OCTRNG_ENABLE_ENTROPY) != 0;
    ensures rand_value == a; @*/
void octrng_rnd(void)
{
    unsigned int value;
    rand_value = get_register(OCTRNG_ENTROPY_REG);
    add_task(octrng_rnd, 10);
}
