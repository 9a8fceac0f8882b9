def main():
    amount = int(input("Enter a number: "))
    if amount > 10:
        print("big")
    elif amount > 5:
        print("medium")
    else:
        print("small")

main()
